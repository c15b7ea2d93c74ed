// Pure view functions: wire payload in, HTML string out. Every number
// shown here comes verbatim from a service response, which is what the
// snapshot tests pin down.

import type {
  ApplyResult,
  Candidate,
  CandidatesPayload,
  Group,
  GroupMember,
  Plan,
} from "./types.js"
import { EFFORT_COLUMNS, RANK_KEYS } from "./types.js"

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
}

const esc = escapeHtml

function kindBadge(kind: string): string {
  return `<span class="badge badge-${esc(kind.toLowerCase())}">${esc(kind)}</span>`
}

function ratioPercent(ratio: number): string {
  return `${(ratio * 100).toFixed(0)}%`
}

export function renderGroupList(groups: Group[]): string {
  const rows = groups
    .map(
      (g) => `
    <tr class="group-row" data-lib="${esc(g.lib)}">
      <td>${kindBadge(g.kind)}</td>
      <td class="lib">${esc(g.lib)}</td>
      <td class="num">${g.severity.distinct_versions}</td>
      <td class="num">${g.severity.affected_poms}</td>
      <td class="num">${ratioPercent(g.severity.affected_ratio)}</td>
      <td>${esc(g.declaration_style)}</td>
    </tr>`,
    )
    .join("")
  return `
  <table class="group-list">
    <thead>
      <tr>
        <th>Kind</th><th>Library</th><th>Versions</th>
        <th>Affected POMs</th><th>Ratio</th><th>Style</th>
      </tr>
    </thead>
    <tbody>${rows}</tbody>
  </table>`
}

function memberRow(m: GroupMember): string {
  const pro = m.pro ? `\${${esc(m.pro)}}` : "—"
  return `
    <tr>
      <td class="highlight-mlib">${esc(m.m_lib)}</td>
      <td>${esc(m.ver ?? "unresolved")}</td>
      <td>${pro}</td>
      <td class="highlight-mver">${esc(m.m_ver ?? "—")}</td>
      <td class="highlight-mpro">${esc(m.m_pro ?? "—")}</td>
      <td class="path">${esc(m.location ?? "")}</td>
    </tr>`
}

/** Group detail: declaration sites with m_lib/m_ver/m_pro highlighted,
 * plus one checkbox per subgroup feeding the selection. */
export function renderGroupDetail(group: Group, selection: Set<string>): string {
  const subgroups = Object.entries(group.subgroups)
    .map(([key, owners]) => {
      const checked = selection.has(key) ? " checked" : ""
      return `
      <label class="subgroup">
        <input type="checkbox" class="subgroup-toggle" value="${esc(key)}"${checked}>
        <code>${esc(key)}</code>
        <span class="owners">covers ${owners.map((o) => esc(o)).join(", ")}</span>
      </label>`
    })
    .join("")
  return `
  <section class="group-detail" data-lib="${esc(group.lib)}">
    <h2>${esc(group.lib)} ${kindBadge(group.kind)}</h2>
    <h3>Declarations</h3>
    <table class="members">
      <thead>
        <tr>
          <th>Owner (m_lib)</th><th>Version</th><th>Property</th>
          <th>Declared in (m_ver)</th><th>Property from (m_pro)</th><th>POM</th>
        </tr>
      </thead>
      <tbody>${group.members.map(memberRow).join("")}</tbody>
    </table>
    <h3>Subgroups</h3>
    <div class="subgroups">${subgroups}</div>
  </section>`
}

function candidateRows(c: Candidate, expanded: Set<string>): string {
  const cells = EFFORT_COLUMNS.map((k) => `<td class="num">${c.counts[k]}</td>`).join("")
  const zero = c.cost === 0 ? ` <span class="badge badge-zero">no harmonization efforts</span>` : ""
  const open = expanded.has(c.version)
  const main = `
    <tr class="candidate-row" data-version="${esc(c.version)}">
      <td class="version"><button class="expand">${open ? "▾" : "▸"}</button>
          ${esc(c.version)}${zero}</td>
      ${cells}
      <td class="num cost">${c.cost}</td>
    </tr>`
  if (!open) return main
  const detail = c.per_dependency
    .map((d) => {
      const sub = EFFORT_COLUMNS.map((k) => `<td class="num">${d.counts[k]}</td>`).join("")
      const approx = d.approximate ? ` <span class="badge badge-approx">approx.</span>` : ""
      return `
    <tr class="dependency-row" data-version="${esc(c.version)}">
      <td class="owner">${esc(d.owner)}${approx}</td>
      ${sub}
      <td></td>
    </tr>`
    })
    .join("")
  return main + detail
}

export function renderCandidates(
  payload: CandidatesPayload,
  expanded: Set<string> = new Set(),
): string {
  const options = RANK_KEYS.map(
    (k) => `<option value="${esc(k)}"${k === payload.rank_key ? " selected" : ""}>${esc(k)}</option>`,
  ).join("")
  const selector = `
  <label class="rank-key">Rank by
    <select class="rank-key-select">${options}</select>
  </label>`
  if (payload.status === "pending") {
    return `${selector}<p class="pending">Computing candidate efforts…</p>`
  }
  if (payload.status === "error") {
    return `${selector}<p class="error-chip">${esc(payload.error ?? "candidate analysis failed")}</p>`
  }
  const header = EFFORT_COLUMNS.map((k) => `<th>|${k}|</th>`).join("")
  const rows = (payload.candidates ?? []).map((c) => candidateRows(c, expanded)).join("")
  const diagnostics = (payload.diagnostics ?? [])
    .map((d) => `<p class="error-chip">${esc(d.code)}: ${esc(d.message)}</p>`)
    .join("")
  return `${selector}
  <table class="candidates">
    <thead><tr><th>Candidate</th>${header}<th>Cost</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>${diagnostics}`
}

function renderDiff(file: string, diff: string): string {
  const lines = diff
    .split("\n")
    .map((line) => {
      const cls = line.startsWith("+")
        ? "add"
        : line.startsWith("-")
          ? "del"
          : line.startsWith("@@")
            ? "hunk"
            : "ctx"
      return `<span class="diff-${cls}">${esc(line)}</span>`
    })
    .join("\n")
  return `
  <details class="diff" open>
    <summary class="path">${esc(file)}</summary>
    <pre class="diff-body">${lines}</pre>
  </details>`
}

export function renderPlan(plan: Plan, confirming: boolean): string {
  const anchors = plan.anchors
    .map(
      (a) => `
    <li><code>${esc(a.anchor)}</code> anchors ${a.covered.map((c) => `<code>${esc(c)}</code>`).join(", ")}</li>`,
    )
    .join("")
  const diffs = Object.entries(plan.diffs)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([file, diff]) => renderDiff(file, diff))
    .join("")
  const replacements = plan.replacements.length
    ? `
  <h3>Replacement suggestions</h3>
  <ul class="replacements">${plan.replacements
    .map(
      (r) => `
    <li><code>${esc(r.deleted)}</code> → <code>${esc(r.replacement)}</code>
        <span class="confidence">${esc(r.confidence)}</span>
        <q class="evidence">${esc(r.evidence)}</q>
        <span class="source">from ${esc(r.source_version)} docs</span></li>`,
    )
    .join("")}</ul>`
    : ""
  const gate = confirming
    ? `
    <p class="confirm-note">This rewrites ${Object.keys(plan.diffs).length} POM file(s)
       to reference one shared property at <strong>${esc(plan.version)}</strong>.
       Expected post-apply classification: <strong>TC</strong>.</p>
    <button class="apply-confirm">Apply now</button>
    <button class="apply-cancel">Cancel</button>`
    : `<button class="apply-request">Apply…</button>`
  return `
  <section class="plan">
    <h2>Plan: harmonize at ${esc(plan.version)}</h2>
    <ul class="anchors">${anchors}</ul>
    ${diffs}
    ${replacements}
    <div class="apply-gate">${gate}</div>
  </section>`
}

export function renderApplied(result: ApplyResult): string {
  const note = result.already_applied
    ? "Already applied — nothing to change."
    : `Rewrote ${result.changed_files.length} file(s).`
  return `
  <p class="applied">${note}
     Post-apply classification: <strong>${esc(result.new_kind)}</strong>.</p>`
}

export function renderStaleBanner(detail: string): string {
  return `
  <div class="stale-banner" role="alert">
    Session is stale: ${esc(detail)}
    <button class="rescan">Re-scan repository</button>
  </div>`
}
