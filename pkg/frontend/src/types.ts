// Wire types for the harmonization service. Field names mirror the
// JSON payloads exactly; see the recorded fixtures under tests/fixtures.

export interface Diagnostic {
  code: string
  message: string
  subject: string | null
}

export interface SessionSummary {
  session_id: string
  summary: {
    poms: number
    groups: number
    kinds: Record<string, number>
  }
}

export interface GroupMember {
  lib: string
  ver: string | null
  pro: string | null
  m_lib: string
  m_ver: string | null
  m_pro: string | null
  scope: string | null
  version_site: string | null
  location: string | null
  flags: string[]
}

export interface Group {
  lib: string
  kind: "IC" | "FC" | "TC" | "SL"
  declaration_style: "explicit" | "implicit" | "mixed"
  members: GroupMember[]
  subgroups: Record<string, string[]>
  severity: {
    affected_poms: number
    affected_ratio: number
    distinct_versions: number
  }
  quarantined: number
  diagnostics: Diagnostic[]
}

export type EffortCounts = Record<"AD" | "AC" | "AU" | "CD" | "CC" | "CU", number>

export interface DependencyEffort {
  owner: string
  counts: EffortCounts
  approximate: boolean
}

export interface Candidate {
  version: string
  cost: number
  counts: EffortCounts
  per_dependency: DependencyEffort[]
}

export interface CandidatesPayload {
  status: "pending" | "ready" | "error"
  rank_key: string
  candidates?: Candidate[]
  diagnostics?: Diagnostic[]
  error?: string
}

export interface Replacement {
  deleted: string
  replacement: string
  source_version: string
  evidence: string
  confidence: "exact" | "arity-only" | string
}

export interface Plan {
  version: string
  anchors: { anchor: string; covered: string[] }[]
  edits: { file: string; kind: string; description: string }[]
  removed_properties: { property: string; pom: string }[]
  diffs: Record<string, string>
  replacements: Replacement[]
  diagnostics: Diagnostic[]
}

export interface ApplyResult {
  applied_at: number
  changed_files: string[]
  already_applied: boolean
  new_kind: string
}

export const RANK_KEYS = ["CD+CC", "CD", "CC", "AD+AC", "AD"]

export const EFFORT_COLUMNS: (keyof EffortCounts)[] = [
  "AD", "AC", "AU", "CD", "CC", "CU",
]
