// View-state wiring. All durable state lives server-side; this class
// only remembers which session/group the user is looking at, so a page
// refresh loses nothing but scroll position.

import * as api from "./api.js"
import type { ApplyResult, CandidatesPayload, Group, Plan } from "./types.js"
import {
  renderApplied,
  renderCandidates,
  renderGroupDetail,
  renderGroupList,
  renderPlan,
  renderStaleBanner,
} from "./views.js"

interface AppState {
  sessionId: string | null
  repoRoot: string
  groups: Group[]
  currentLib: string | null
  selection: Set<string>
  candidates: CandidatesPayload | null
  expanded: Set<string>
  plan: Plan | null
  confirming: boolean
  applied: ApplyResult | null
  staleDetail: string | null
  error: string | null
}

const POLL_INTERVAL_MS = 1000

export class App {
  state: AppState = {
    sessionId: null,
    repoRoot: "",
    groups: [],
    currentLib: null,
    selection: new Set(),
    candidates: null,
    expanded: new Set(),
    plan: null,
    confirming: false,
    applied: null,
    staleDetail: null,
    error: null,
  }

  constructor(private root: HTMLElement) {
    root.addEventListener("click", (e) => this.onClick(e))
    root.addEventListener("change", (e) => void this.onChange(e))
    root.addEventListener("submit", (e) => void this.onSubmit(e))
  }

  async openRepo(repoRoot: string) {
    this.state.repoRoot = repoRoot
    await this.guard(async () => {
      const session = await api.createSession(repoRoot)
      this.state.sessionId = session.session_id
      this.state.currentLib = null
      this.state.staleDetail = null
      const { groups } = await api.fetchGroups(session.session_id)
      this.state.groups = groups
    })
    this.render()
  }

  async openGroup(lib: string) {
    this.state.currentLib = lib
    this.state.selection = new Set()
    this.state.candidates = null
    this.state.plan = null
    this.state.confirming = false
    this.state.applied = null
    this.render()
  }

  async toggleSubgroup(key: string, on: boolean) {
    if (on) this.state.selection.add(key)
    else this.state.selection.delete(key)
    if (!this.state.sessionId || !this.state.currentLib) return
    if (this.state.selection.size === 0) {
      this.state.candidates = null
      this.render()
      return
    }
    const lib = this.state.currentLib
    await this.guard(async () => {
      await api.setSelection(this.state.sessionId!, lib, [...this.state.selection])
      await this.loadCandidates()
    })
    this.render()
  }

  async loadCandidates(rankKey?: string) {
    const { sessionId, currentLib } = this.state
    if (!sessionId || !currentLib) return
    const payload = await api.fetchCandidates(sessionId, currentLib, rankKey)
    this.state.candidates = payload
    if (payload.status === "pending") {
      setTimeout(() => {
        void this.guard(() => this.loadCandidates(rankKey)).then(() => this.render())
      }, POLL_INTERVAL_MS)
    }
  }

  async makePlan(version: string) {
    const { sessionId, currentLib } = this.state
    if (!sessionId || !currentLib) return
    await this.guard(async () => {
      this.state.plan = await api.requestPlan(sessionId, currentLib, version)
      this.state.confirming = false
      this.state.applied = null
    })
    this.render()
  }

  async apply() {
    const { sessionId, currentLib } = this.state
    if (!sessionId || !currentLib) return
    // no optimistic UI: the result view renders only what the service confirmed
    await this.guard(async () => {
      this.state.applied = await api.applyPlan(sessionId, currentLib)
      this.state.confirming = false
    })
    this.render()
  }

  private async guard(action: () => Promise<void>) {
    this.state.error = null
    try {
      await action()
    } catch (err) {
      if (err instanceof api.ApiError && err.isStale) {
        this.state.staleDetail = err.detail
      } else if (err instanceof Error) {
        this.state.error = err.message
      } else {
        this.state.error = String(err)
      }
    }
  }

  private onClick(e: Event) {
    const target = e.target as HTMLElement
    const row = target.closest<HTMLElement>(".group-row")
    if (row?.dataset.lib) {
      void this.openGroup(row.dataset.lib)
      return
    }
    if (target.closest(".expand")) {
      const version = target.closest<HTMLElement>(".candidate-row")?.dataset.version
      if (version) {
        if (this.state.expanded.has(version)) this.state.expanded.delete(version)
        else this.state.expanded.add(version)
        this.render()
      }
      return
    }
    if (target.closest(".apply-request")) {
      this.state.confirming = true
      this.render()
    } else if (target.closest(".apply-cancel")) {
      this.state.confirming = false
      this.render()
    } else if (target.closest(".apply-confirm")) {
      void this.apply()
    } else if (target.closest(".rescan")) {
      void this.openRepo(this.state.repoRoot)
    }
  }

  private async onChange(e: Event) {
    const target = e.target as HTMLInputElement
    if (target.classList.contains("subgroup-toggle")) {
      await this.toggleSubgroup(target.value, target.checked)
    } else if (target.classList.contains("rank-key-select")) {
      await this.guard(() => this.loadCandidates(target.value))
      this.render()
    }
  }

  private async onSubmit(e: Event) {
    e.preventDefault()
    const form = e.target as HTMLFormElement
    if (form.classList.contains("repo-form")) {
      const input = form.querySelector<HTMLInputElement>("input[name=repo_root]")
      if (input?.value) await this.openRepo(input.value)
    } else if (form.classList.contains("plan-form")) {
      const input = form.querySelector<HTMLInputElement>("input[name=version]")
      if (input?.value) await this.makePlan(input.value)
    }
  }

  render() {
    const s = this.state
    const parts: string[] = []
    if (s.staleDetail) parts.push(renderStaleBanner(s.staleDetail))
    if (s.error) parts.push(`<p class="error-chip">${s.error}</p>`)
    parts.push(`
      <form class="repo-form">
        <input name="repo_root" placeholder="repository path" value="${s.repoRoot}">
        <button type="submit">Scan</button>
      </form>`)
    if (s.groups.length) parts.push(renderGroupList(s.groups))
    const group = s.groups.find((g) => g.lib === s.currentLib)
    if (group) {
      parts.push(renderGroupDetail(group, s.selection))
      if (s.candidates) parts.push(renderCandidates(s.candidates, s.expanded))
      if (s.selection.size > 0) {
        parts.push(`
        <form class="plan-form">
          <input name="version" placeholder="harmonized version">
          <button type="submit">Plan</button>
        </form>`)
      }
      if (s.plan) parts.push(renderPlan(s.plan, s.confirming))
      if (s.applied) parts.push(renderApplied(s.applied))
    }
    this.root.innerHTML = parts.join("\n")
  }
}
