// Apply-flow round trip driven through the DOM, with fetch stubbed by
// the recorded service fixtures: select both subgroups, plan at 23.0,
// confirm, apply, and verify the service-confirmed classification.

// @vitest-environment happy-dom

import { beforeEach, describe, expect, it, vi } from "vitest"

import { App } from "../src/app.js"

import applyFixture from "./fixtures/apply.json"
import groupsFixture from "./fixtures/groups.json"
import planFixture from "./fixtures/plan.json"
import selectionFixture from "./fixtures/selection.json"
import sessionFixture from "./fixtures/session.json"

const GUAVA = "com.google.guava:guava"

function json(payload: unknown, status = 200) {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  })
}

const calls: { method: string; url: string }[] = []

function fixtureFetch(input: RequestInfo | URL, init?: RequestInit): Promise<Response> {
  const url = String(input)
  const method = init?.method ?? "GET"
  calls.push({ method, url })
  if (method === "POST" && url.endsWith("/sessions")) return Promise.resolve(json(sessionFixture, 201))
  if (url.endsWith("/groups")) return Promise.resolve(json(groupsFixture))
  if (url.endsWith("/selection")) return Promise.resolve(json(selectionFixture))
  if (url.includes("/candidates")) {
    // guava has no versions in the fixture repository
    return Promise.resolve(json({ status: "error", rank_key: "CD+CC", error: "no versions" }))
  }
  if (url.endsWith("/plan")) return Promise.resolve(json(planFixture))
  if (url.endsWith("/apply")) return Promise.resolve(json(applyFixture))
  return Promise.resolve(json({ detail: `unexpected ${method} ${url}` }, 500))
}

function click(root: HTMLElement, selector: string) {
  const el = root.querySelector<HTMLElement>(selector)
  expect(el, selector).toBeTruthy()
  el!.dispatchEvent(new Event("click", { bubbles: true }))
}

async function settle() {
  // let the event handlers' promise chains run to completion
  for (let i = 0; i < 10; i++) await Promise.resolve()
}

describe("apply flow", () => {
  let root: HTMLElement
  let app: App

  beforeEach(() => {
    vi.stubGlobal("fetch", vi.fn(fixtureFetch))
    calls.length = 0
    document.body.innerHTML = `<div id="app"></div>`
    root = document.getElementById("app")!
    app = new App(root)
    app.render()
  })

  it("round-trips the recorded harmonization", async () => {
    await app.openRepo("/repo")
    expect(root.querySelectorAll(".group-row").length).toBe(2)

    click(root, `.group-row[data-lib="${GUAVA}"]`)
    await settle()
    expect(root.querySelector(".group-detail h2")?.textContent).toContain(GUAVA)

    // re-query after each toggle: rendering replaces the DOM
    const keys = [...root.querySelectorAll<HTMLInputElement>(".subgroup-toggle")].map(
      (b) => b.value,
    )
    expect(keys.length).toBe(2)
    for (const key of keys) {
      const box = root.querySelector<HTMLInputElement>(`.subgroup-toggle[value="${key}"]`)!
      box.checked = true
      box.dispatchEvent(new Event("change", { bubbles: true }))
      await settle()
    }
    expect(calls.filter((c) => c.url.endsWith("/selection")).length).toBe(2)

    await app.makePlan("23.0")
    const diffs = root.querySelectorAll(".diff")
    expect(diffs.length).toBe(3)
    expect(root.textContent).toContain("guava.new.version")

    // the apply button is gated: first click only opens the confirmation
    click(root, ".apply-request")
    expect(calls.some((c) => c.url.endsWith("/apply"))).toBe(false)
    expect(root.textContent).toContain("Expected post-apply classification: TC")

    click(root, ".apply-confirm")
    await settle()
    expect(calls.filter((c) => c.method === "POST" && c.url.endsWith("/apply")).length).toBe(1)
    expect(root.querySelector(".applied")?.textContent).toContain("Post-apply classification: TC")
    expect(root.querySelector(".applied")?.textContent).toContain("3 file(s)")
  })

  it("cancel backs out without calling the service", async () => {
    await app.openRepo("/repo")
    click(root, `.group-row[data-lib="${GUAVA}"]`)
    await settle()
    await app.makePlan("23.0")
    click(root, ".apply-request")
    click(root, ".apply-cancel")
    expect(root.querySelector(".apply-request")).toBeTruthy()
    expect(calls.some((c) => c.url.endsWith("/apply"))).toBe(false)
  })

  it("shows the stale banner on a 409", async () => {
    await app.openRepo("/repo")
    click(root, `.group-row[data-lib="${GUAVA}"]`)
    await settle()
    vi.stubGlobal("fetch", vi.fn(() =>
      Promise.resolve(json({ detail: "repository changed since the session began" }, 409)),
    ))
    await app.makePlan("23.0")
    expect(root.querySelector(".stale-banner")?.textContent).toContain("repository changed")
  })
})
