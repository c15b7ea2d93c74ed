import type {
  ApplyResult,
  CandidatesPayload,
  Group,
  Plan,
  SessionSummary,
} from "./types.js"

const DEFAULT_BASE = ""

let baseUrl = DEFAULT_BASE

export function setBaseUrl(url: string) {
  baseUrl = url.replace(/\/$/, "")
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`)
  }

  get isStale(): boolean {
    return this.status === 409
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(baseUrl + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  })
  if (!res.ok) {
    let detail = res.statusText
    try {
      const body = await res.json()
      if (body && typeof body.detail === "string") detail = body.detail
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail)
  }
  return (await res.json()) as T
}

export function createSession(repoRoot: string) {
  return request<SessionSummary>("/sessions", {
    method: "POST",
    body: JSON.stringify({ repo_root: repoRoot }),
  })
}

export function fetchGroups(sessionId: string) {
  return request<{ groups: Group[] }>(`/sessions/${sessionId}/groups`)
}

export function setSelection(sessionId: string, lib: string, subgroupKeys: string[]) {
  return request<{ selection: string[] }>(
    `/sessions/${sessionId}/groups/${encodeURIComponent(lib)}/selection`,
    { method: "POST", body: JSON.stringify({ subgroup_keys: subgroupKeys }) },
  )
}

export function fetchCandidates(sessionId: string, lib: string, rankKey?: string) {
  const query = rankKey ? `?rank_key=${encodeURIComponent(rankKey)}` : ""
  return request<CandidatesPayload>(
    `/sessions/${sessionId}/groups/${encodeURIComponent(lib)}/candidates${query}`,
  )
}

export function requestPlan(sessionId: string, lib: string, version: string) {
  return request<Plan>(
    `/sessions/${sessionId}/groups/${encodeURIComponent(lib)}/plan`,
    { method: "POST", body: JSON.stringify({ version }) },
  )
}

export function applyPlan(sessionId: string, lib: string) {
  return request<ApplyResult>(
    `/sessions/${sessionId}/groups/${encodeURIComponent(lib)}/apply`,
    { method: "POST" },
  )
}
