import type { AppliedEvent, Snapshot, StreamMessage } from './types.js';
import { IMMEDIATE_POLICIES } from './types.js';

// The UI is a pure mirror of the service: the store never recomputes any
// simulation quantity, it only holds the latest snapshot plus the applied-
// event log received in stream order.

export interface SessionView {
  snapshot: Snapshot | null;
  eventLog: AppliedEvent[];
  notice: string | null;
}

export type Listener = (store: SessionStore) => void;

export class SessionStore {
  snapshot: Snapshot | null = null;
  eventLog: AppliedEvent[] = [];
  notice: string | null = null;
  selectedPolicy = 'mect';
  queueSize = 'inf';
  private listeners: Listener[] = [];

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this);
  }

  get mode(): string {
    return this.snapshot?.mode ?? 'paused';
  }

  get started(): boolean {
    // Configuration locks once any event has applied.
    return this.snapshot !== null && this.snapshot.last_event !== null;
  }

  get immediateSelected(): boolean {
    return IMMEDIATE_POLICIES.includes(this.selectedPolicy);
  }

  /** Ack snapshots from control calls and state polls land here. */
  applySnapshot(snapshot: Snapshot): void {
    this.snapshot = snapshot;
    this.emit();
  }

  /** Stream messages land here, already ordered by stream_seq. */
  applyMessage(message: StreamMessage): void {
    switch (message.type) {
      case 'applied':
        if (message.event) this.eventLog.push(message.event);
        this.snapshot = message.snapshot;
        break;
      case 'reset':
        this.eventLog = [];
        this.snapshot = message.snapshot;
        break;
      default: // 'snapshot' on subscribe, 'state' on mode/speed changes
        this.snapshot = message.snapshot;
        break;
    }
    this.emit();
  }

  setNotice(text: string | null): void {
    this.notice = text;
    this.emit();
  }

  selectPolicy(policy: string): void {
    this.selectedPolicy = policy;
    if (IMMEDIATE_POLICIES.includes(policy)) {
      this.queueSize = 'inf'; // immediate mode: machine queues are unbounded
    }
    this.emit();
  }

  setQueueSize(size: string): void {
    this.queueSize = size;
    this.emit();
  }
}
