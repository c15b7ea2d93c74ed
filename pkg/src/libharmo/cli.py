"""Command line interface.

Verbs: scan (classify a repository), effort (rank candidate versions for
one library), harmonize (plan and apply the refactoring), serve (local
HTTP service for the companion UI), refresh (re-fetch a version index).

Exit codes: 0 clean, 1 inconsistencies or false consistencies present,
2 analysis error.
"""

from __future__ import annotations

import sys

import click

from . import pipeline, report as report_mod
from .errors import LibharmoError
from .libdb import DEFAULT_REPO_URL, LibraryDb, default_cache_dir
from .refactor import DRY_RUN, WRITE, apply as apply_plan
from .resolver import LibraryId

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


def _parse_lib(text: str) -> LibraryId:
    if ":" not in text:
        raise click.BadParameter("expected groupId:artifactId")
    group_id, artifact_id = text.split(":", 1)
    return LibraryId(group_id, artifact_id)


@click.group()
@click.option("--offline", is_flag=True, help="Never touch the network.")
@click.option("--cache-dir", type=click.Path(), default=None,
              help="Artifact cache directory (default: LIBHARMO_CACHE_DIR).")
@click.option("--repo-url", default=DEFAULT_REPO_URL, show_default=True,
              help="Maven repository URL or local directory.")
@click.option("--format", "fmt", type=click.Choice(["json", "md", "text"]),
              default="text", show_default=True)
@click.option("--include-test-scope/--exclude-test-scope", default=True,
              show_default=True)
@click.pass_context
def main(ctx, offline, cache_dir, repo_url, fmt, include_test_scope):
    """Detect and fix library version inconsistencies in Maven projects."""
    ctx.obj = {
        "db": LibraryDb(cache_dir=cache_dir or default_cache_dir(),
                        repo_url=repo_url, offline=offline),
        "fmt": fmt,
        "include_test_scope": include_test_scope,
    }


def _analyze(ctx, repo):
    return pipeline.analyze(repo, db=ctx.obj["db"],
                            include_test_scope=ctx.obj["include_test_scope"])


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_ERROR)


@main.command()
@click.argument("repo", type=click.Path(exists=True, file_okay=False))
@click.pass_context
def scan(ctx, repo):
    """Classify every library's version declarations across the repo."""
    try:
        analysis = _analyze(ctx, repo)
    except LibharmoError as e:
        _fail(str(e))
    doc = report_mod.build_report(repo, analysis.graph, analysis.dep_set,
                                  analysis.groups)
    click.echo(report_mod.RENDERERS[ctx.obj["fmt"]](doc), nl=False)
    sys.exit(EXIT_FINDINGS if report_mod.has_findings(doc) else EXIT_CLEAN)


@main.command()
@click.argument("repo", type=click.Path(exists=True, file_okay=False))
@click.argument("lib")
@click.option("--max-candidates", default=50, show_default=True)
@click.option("--rank-key", default="CD+CC", show_default=True,
              type=click.Choice(["CD+CC", "CD", "CC", "AD+AC", "AD"]))
@click.pass_context
def effort(ctx, repo, lib, max_candidates, rank_key):
    """Rank candidate harmonized versions for one library."""
    library = _parse_lib(lib)
    try:
        analysis = _analyze(ctx, repo)
        group = analysis.group(library)
        result = pipeline.group_efforts(analysis, group, ctx.obj["db"],
                                        rank_key=rank_key,
                                        max_candidates=max_candidates)
    except LibharmoError as e:
        _fail(str(e))
    click.echo(f"{library} [{group.kind}] candidates "
               f"(rank key {result.ranking.rank_key}):")
    for version, breakdown in result.ranking.candidates:
        counts = breakdown["counts"]
        label = " — no harmonization efforts" if breakdown["cost"] == 0 else ""
        click.echo(f"  {version}: cost={breakdown['cost']} "
                   f"AD={counts['AD']} AC={counts['AC']} AU={counts['AU']} "
                   f"CD={counts['CD']} CC={counts['CC']} CU={counts['CU']}{label}")
        for row in breakdown["per_dependency"]:
            c = row["counts"]
            approx = " (approximate)" if row["approximate"] else ""
            click.echo(f"      {row['owner']}: AD={c['AD']} AC={c['AC']} "
                       f"AU={c['AU']} CD={c['CD']} CC={c['CC']} CU={c['CU']}{approx}")
    for d in result.diagnostics:
        click.echo(f"  note [{d.code}] {d.subject}: {d.message}", err=True)
    sys.exit(EXIT_CLEAN)


@main.command()
@click.argument("repo", type=click.Path(exists=True, file_okay=False))
@click.argument("lib")
@click.argument("version")
@click.option("--module", "modules", multiple=True,
              help="Restrict to subgroups whose declaring POM has this artifactId.")
@click.option("--dry-run/--write", default=True, show_default=True)
@click.pass_context
def harmonize(ctx, repo, lib, version, modules, dry_run):
    """Rewrite the selected declarations to one shared version property."""
    library = _parse_lib(lib)
    db = ctx.obj["db"]
    try:
        analysis = _analyze(ctx, repo)
        group = analysis.group(library)
        selection = sorted(group.subgroups, key=str)
        if modules:
            selection = [c for c in selection if c.artifact_id in set(modules)]
            if not selection:
                _fail(f"no subgroup declared in modules {', '.join(modules)}")
        plan = pipeline.make_plan(analysis, group, selection, version,
                                  fetcher=db.fetch_pom_text)
        result = apply_plan(plan, DRY_RUN if dry_run else WRITE)
    except LibharmoError as e:
        _fail(str(e))
    if result.already_applied or not result.changed_files:
        click.echo("nothing to change")
    for path in result.changed_files:
        click.echo(result.diffs[path], nl=False)
    if result.new_kind:
        click.echo(f"post-apply classification: {result.new_kind}")
    for d in plan.diagnostics:
        click.echo(f"note [{d.code}] {d.subject}: {d.message}", err=True)
    _print_replacements(ctx, analysis, group, version, db)
    sys.exit(EXIT_CLEAN)


def _print_replacements(ctx, analysis, group, version, db):
    """Best-effort: needs JARs; silently reduced when unavailable."""
    try:
        efforts = pipeline.group_efforts(analysis, group, db)
        suggestions, _ = pipeline.replacements_for(group, version, efforts, db)
    except LibharmoError:
        return
    for s in suggestions:
        click.echo(f"replacement: {s.deleted} -> {s.replacement_fqn} "
                   f"(documented in {s.source_version}: \"{s.evidence}\")")


@main.command()
@click.argument("lib")
@click.pass_context
def refresh(ctx, lib):
    """Re-fetch the remote version index for a library."""
    library = _parse_lib(lib)
    try:
        index = ctx.obj["db"].refresh(library)
    except LibharmoError as e:
        _fail(str(e))
    click.echo(f"{library}: {len(index.versions)} versions, "
               f"latest {index.version_strings[-1] if index.versions else 'n/a'}")
    sys.exit(EXIT_CLEAN)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--static-dir", type=click.Path(exists=True, file_okay=False),
              default=None, help="Directory of built UI assets to serve at /.")
@click.pass_context
def serve(ctx, host, port, static_dir):
    """Run the local HTTP service for the companion UI."""
    import uvicorn

    from .service import create_app

    app = create_app(db=ctx.obj["db"],
                     include_test_scope=ctx.obj["include_test_scope"],
                     static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
