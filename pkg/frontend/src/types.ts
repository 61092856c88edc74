// Wire types mirroring the engine's HTTP API.

export type RunStatus =
  | "pending"
  | "divergent"
  | "convergent"
  | "awaiting_selection"
  | "refining"
  | "qa"
  | "dialog"
  | "distilling"
  | "done"
  | "failed";

export const TERMINAL_STATUSES: RunStatus[] = ["done", "failed"];

export interface RunRecord {
  run_id: string;
  protocol: "idea_mining" | "procedure_design" | "evaluate" | "categorize";
  status: RunStatus;
  created: string;
  updated: string;
  artifacts: string[];
  error: string | null;
}

export interface IdeaRecord {
  id: string;
  text: string;
  gen_index: number;
  source_batch: number;
}

export interface IdeasArtifact {
  prompt?: string;
  ideas: IdeaRecord[];
  stats?: { batches_used: number; duplicates_rejected: number; total_parsed: number };
}

export interface RankEntry {
  idea_id: string;
  score: number;
  rationale: string;
}

export interface RankingsArtifact {
  novelty: RankEntry[];
  effectiveness: RankEntry[];
}

export interface QAPair {
  question: string;
  answer: string;
  context_used?: string[];
}

export interface ProcedureDoc {
  title: string;
  materials: string[];
  steps: string[];
  notes: string[];
  qa_grounding: QAPair[];
  raw: string;
}

export interface FollowupEntry {
  question: string;
  answer: string;
  revision: string | null;
}

export interface FollowupResponse {
  answer: string;
  revised: ProcedureDoc | null;
}

export interface TranscriptArtifact {
  idea_id?: string;
  opener: string;
  turns: [string, string][];
  distilled: string | null;
}

export interface RunEvent {
  seq: number;
  ts: string;
  type: string;
  status?: RunStatus;
  [key: string]: unknown;
}

export interface FieldError {
  field: string;
  message: string;
}
