import type { ServiceClient } from './api.js';
import type { SessionStore } from './store.js';
import { IMMEDIATE_POLICIES } from './types.js';

// Control panel behavior: every user action maps to exactly one documented
// service call, and what the buttons may do only depends on the latest
// snapshot. Service rejections surface as non-blocking notices.

export interface ButtonStates {
  play: boolean;
  step: boolean;
  reset: boolean;
  speed: boolean;
  configEditable: boolean; // policy + queue size selectors
  queueSizeEditable: boolean; // greyed at 'inf' for immediate policies
}

export function buttonStates(store: SessionStore): ButtonStates {
  const mode = store.mode;
  const loaded = store.snapshot !== null;
  return {
    play: loaded && mode !== 'finished',
    step: loaded && mode === 'paused',
    reset: loaded && mode !== 'running',
    speed: loaded && mode !== 'finished',
    configEditable: loaded && mode === 'paused' && !store.started,
    queueSizeEditable:
      loaded && mode === 'paused' && !store.started && !store.immediateSelected,
  };
}

export class ControlPanel {
  constructor(
    private client: ServiceClient,
    private store: SessionStore,
    private sessionId: string,
  ) {}

  private async send(body: Parameters<ServiceClient['control']>[1]) {
    try {
      const { snapshot } = await this.client.control(this.sessionId, body);
      this.store.applySnapshot(snapshot);
      this.store.setNotice(null);
    } catch (error) {
      this.store.setNotice(String((error as Error).message ?? error));
    }
  }

  /** Play and pause share one button; the service toggles. */
  async playPause(): Promise<void> {
    await this.send({ command: 'play' });
  }

  async step(): Promise<void> {
    if (!buttonStates(this.store).step) return; // enabled only while paused
    await this.send({ command: 'step' });
  }

  async reset(): Promise<void> {
    await this.send({ command: 'reset' });
  }

  async setSpeed(speed: number): Promise<void> {
    await this.send({ command: 'set_speed', speed });
  }

  async setPolicy(policy: string): Promise<void> {
    // Immediate-mode policies require unbounded queues, so the service
    // must see the queue change before the policy change.
    const widenFirst =
      IMMEDIATE_POLICIES.includes(policy) && this.store.queueSize !== 'inf';
    this.store.selectPolicy(policy);
    if (widenFirst) {
      await this.send({ command: 'set_queue_size', queue_size: 'inf' });
    }
    await this.send({ command: 'set_policy', policy });
  }

  async setQueueSize(queueSize: string): Promise<void> {
    this.store.setQueueSize(queueSize);
    await this.send({ command: 'set_queue_size', queue_size: queueSize });
  }
}
