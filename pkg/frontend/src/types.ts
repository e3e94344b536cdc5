// Wire types mirroring the control service's JSON. All times are seconds.

export interface ExecutingInfo {
  task: number;
  started_s: number;
  will_finish_s: number;
  progress: number;
}

export interface MachineSnapshot {
  index: number;
  name: string;
  waiting: number[];
  executing: ExecutingInfo | null;
  busy_s: number;
  idle_s: number;
}

export interface Counters {
  total: number;
  pending: number;
  completed: number;
  canceled: number;
  missed: number;
}

export interface StatusChange {
  task: number;
  from: string;
  to: string;
}

export interface AppliedEvent {
  seq: number;
  time_s: number;
  kind: string;
  entity: number;
  changes: StatusChange[];
  assignments: { task: number; machine: number; predicted_completion_s: number }[];
  starts: { task: number; machine: number; will_finish_s: number }[];
}

export interface Snapshot {
  clock_s: number;
  mode: 'paused' | 'running' | 'finished';
  speed: number;
  finished: boolean;
  counters: Counters;
  batch: number[];
  machines: MachineSnapshot[];
  last_event: AppliedEvent | null;
}

export interface StreamMessage {
  type: 'snapshot' | 'applied' | 'state' | 'reset';
  stream_seq: number;
  snapshot: Snapshot;
  event?: AppliedEvent;
}

export type ReportKind = 'task' | 'machine' | 'summary' | 'full';

export const REPORT_KINDS: ReportKind[] = ['task', 'machine', 'summary', 'full'];

export const IMMEDIATE_POLICIES = ['fcfs', 'mect', 'meet'];
export const BATCH_POLICIES = ['mm', 'mmu', 'msd'];
export const ALL_POLICIES = [...IMMEDIATE_POLICIES, ...BATCH_POLICIES];
