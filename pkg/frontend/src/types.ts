// DTOs mirroring the curation service's JSON bodies.

export interface BucketCount {
  bucket: string;
  placed: number;
  unplaced: number;
}

export interface RelationView {
  name: string;
  placed: boolean;
  bucket: string | null;
  sources: string[];
  supportTotal: number;
  supportByBucket: Record<string, number>;
  filtered: boolean;
  introduced: boolean;
  parent: string | null;
}

export interface SupportTriple {
  head: string;
  relation: string;
  tail: string;
  headType: string;
  tailType: string;
  source: string;
}

export interface HierarchyNode {
  name: string;
  bucket: string;
  parent: string | null;
  sources: string[];
  introduced: boolean;
}

export interface HierarchyDoc {
  tag: string;
  nodes: HierarchyNode[];
}

export interface Stats {
  tag: string;
  total: number;
  depth3: number;
  depth4: number;
  depth5: number;
  mean_depth: number | null;
}

export type DecisionAction = "PLACE" | "INTRODUCE" | "RESOLVE_CONFLICT" | "CHOOSE_ALIAS";

export interface DecisionIn {
  action: DecisionAction;
  actor?: string;
  name?: string | null;
  parent?: string | null;
  bucket?: string | null;
  group?: string[];
  representative?: string | null;
}

export interface Decision extends DecisionIn {
  sequence: number;
  timestamp: string;
}

// One entry of the merge tool's conflicts file, pasted into the workbench.
export interface MergeConflict {
  name: string;
  chosen_tag: string;
  chosen_parent: string | null;
  chosen_bucket: string;
  alternatives: { tag: string; parent: string | null; bucket: string }[];
}

export const BUCKET_NAMES = [
  "loc-loc", "loc-org", "loc-per",
  "org-loc", "org-org", "org-per",
  "per-loc", "per-org", "per-per",
] as const;
