import type { AppliedEvent, Snapshot, StreamMessage } from '../src/types.js';

export function snapshot(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    clock_s: 0,
    mode: 'paused',
    speed: 1,
    finished: false,
    counters: { total: 1, pending: 1, completed: 0, canceled: 0, missed: 0 },
    batch: [],
    machines: [
      {
        index: 0,
        name: 'M0',
        waiting: [],
        executing: null,
        busy_s: 0,
        idle_s: 0,
      },
    ],
    last_event: null,
    ...overrides,
  };
}

export function appliedEvent(overrides: Partial<AppliedEvent> = {}): AppliedEvent {
  return {
    seq: 0,
    time_s: 1,
    kind: 'arrival',
    entity: 0,
    changes: [{ task: 0, from: 'pending', to: 'batched' }],
    assignments: [],
    starts: [],
    ...overrides,
  };
}

export function appliedMessage(
  seq: number,
  event: AppliedEvent,
  snap: Snapshot,
): StreamMessage {
  return { type: 'applied', stream_seq: seq, snapshot: snap, event };
}
