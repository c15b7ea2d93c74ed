// Snapshot tests against recorded service responses. The fixtures are
// produced by scripts/record_fixtures.py from the real HTTP service, so
// these pin the UI to the actual wire contract.

import { describe, expect, it } from "vitest"

import type { CandidatesPayload, Group, Plan } from "../src/types.js"
import { EFFORT_COLUMNS } from "../src/types.js"
import {
  renderCandidates,
  renderGroupDetail,
  renderGroupList,
  renderPlan,
  renderStaleBanner,
} from "../src/views.js"

import candidatesFixture from "./fixtures/candidates.json"
import candidatesFcFixture from "./fixtures/candidates_fc.json"
import groupsFixture from "./fixtures/groups.json"
import planFixture from "./fixtures/plan.json"

const groups = (groupsFixture as { groups: Group[] }).groups
const candidates = candidatesFixture as CandidatesPayload
const candidatesFc = candidatesFcFixture as CandidatesPayload
const plan = planFixture as Plan

describe("group list", () => {
  it("matches the recorded snapshot", () => {
    expect(renderGroupList(groups)).toMatchSnapshot()
  })

  it("shows a kind badge and severity columns per group", () => {
    const html = renderGroupList(groups)
    expect(html).toContain(`badge-ic`)
    expect(html).toContain(`badge-fc`)
    for (const g of groups) {
      expect(html).toContain(String(g.severity.affected_poms))
      expect(html).toContain(String(g.severity.distinct_versions))
      expect(html).toContain(g.declaration_style)
    }
  })
})

describe("group detail", () => {
  it("matches the recorded snapshot", () => {
    const guava = groups.find((g) => g.lib === "com.google.guava:guava")!
    expect(renderGroupDetail(guava, new Set())).toMatchSnapshot()
  })

  it("renders one checkbox per subgroup and ticks the selection", () => {
    const guava = groups.find((g) => g.lib === "com.google.guava:guava")!
    const selected = new Set(["com.example:project-c:1.0.0"])
    const html = renderGroupDetail(guava, selected)
    const boxes = html.match(/class="subgroup-toggle"/g) ?? []
    expect(boxes.length).toBe(Object.keys(guava.subgroups).length)
    expect(html).toContain(`value="com.example:project-c:1.0.0" checked`)
  })
})

describe("candidate table", () => {
  it("matches the recorded snapshot", () => {
    expect(renderCandidates(candidates)).toMatchSnapshot()
  })

  it("renders all six effort components for every candidate", () => {
    const html = renderCandidates(candidates)
    for (const key of EFFORT_COLUMNS) {
      expect(html).toContain(`<th>|${key}|</th>`)
    }
    for (const c of candidates.candidates!) {
      for (const key of EFFORT_COLUMNS) {
        expect(html).toContain(`>${c.counts[key]}</td>`)
      }
      expect(html).toContain(`>${c.cost}</td>`)
    }
  })

  it("expands per-dependency rows", () => {
    const html = renderCandidates(candidates, new Set(["2.0"]))
    expect(html).toContain("com.app:m0:1.0")
    expect(html).toContain("com.app:m1:1.0")
  })

  it("collapses an FC group to the single current version", () => {
    const html = renderCandidates(candidatesFc)
    const rows = html.match(/class="candidate-row"/g) ?? []
    expect(rows.length).toBe(1)
    expect(html).toContain("no harmonization efforts")
  })

  it("renders pending and error states", () => {
    expect(renderCandidates({ status: "pending", rank_key: "CD+CC" })).toContain("Computing")
    expect(
      renderCandidates({ status: "error", rank_key: "CD+CC", error: "boom" }),
    ).toContain("boom")
  })

  it("only shows numbers present in the service response", () => {
    const html = renderCandidates(candidates, new Set(["2.0"]))
    const blob = JSON.stringify(candidates)
    for (const match of html.matchAll(/>(\d+)</g)) {
      expect(blob).toContain(match[1])
    }
  })
})

describe("plan view", () => {
  it("matches the recorded snapshot", () => {
    expect(renderPlan(plan, false)).toMatchSnapshot()
  })

  it("shows the three-file diff for the harmonization example", () => {
    const html = renderPlan(plan, false)
    const diffBlocks = html.match(/class="diff"/g) ?? []
    expect(diffBlocks.length).toBe(3)
    expect(html).toContain("guava.new.version")
    expect(html).toContain("diff-add")
    expect(html).toContain("diff-del")
  })

  it("gates apply behind a confirmation naming the expected kind", () => {
    expect(renderPlan(plan, false)).toContain("apply-request")
    expect(renderPlan(plan, false)).not.toContain("apply-confirm")
    const confirming = renderPlan(plan, true)
    expect(confirming).toContain("apply-confirm")
    expect(confirming).toContain("Expected post-apply classification: <strong>TC</strong>")
  })
})

describe("stale banner", () => {
  it("escapes the detail text", () => {
    const html = renderStaleBanner(`repository changed <since> the session began`)
    expect(html).toContain("&lt;since&gt;")
    expect(html).toContain("rescan")
  })
})
