import type { ReportKind, Snapshot } from './types.js';
import { subscribeEvents, type Subscription } from './sse.js';

export interface ScenarioFiles {
  eet: string;
  workload: string;
  machines: string;
}

export interface SessionConfig {
  policy: string;
  queueSize: string; // 'inf' or a positive integer as text
  seed: number;
}

export interface ControlBody {
  command: string;
  speed?: number;
  policy?: string;
  queue_size?: string;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') return body.detail;
    if (body.detail?.message) {
      const violations = body.detail.violations ?? [];
      return [body.detail.message, ...violations].join('; ');
    }
  } catch {
    /* non-JSON error body */
  }
  return `request failed with status ${response.status}`;
}

/** Thin typed client for the control service; one instance per base URL. */
export class ServiceClient {
  constructor(private baseUrl: string = '') {}

  private async checked(response: Response): Promise<Response> {
    if (!response.ok) {
      throw new ServiceError(response.status, await errorDetail(response));
    }
    return response;
  }

  async createSession(
    files: ScenarioFiles,
    config: SessionConfig,
  ): Promise<{ id: string; snapshot: Snapshot }> {
    const form = new FormData();
    form.append('eet', new Blob([files.eet]), 'eet.csv');
    form.append('workload', new Blob([files.workload]), 'workload.csv');
    form.append('machines', new Blob([files.machines]), 'machines.csv');
    form.append('policy', config.policy);
    form.append('queue_size', config.queueSize);
    form.append('seed', String(config.seed));
    const response = await this.checked(
      await fetch(`${this.baseUrl}/sessions`, { method: 'POST', body: form }),
    );
    return response.json();
  }

  async control(
    sessionId: string,
    body: ControlBody,
  ): Promise<{ snapshot: Snapshot }> {
    const response = await this.checked(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/control`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      }),
    );
    return response.json();
  }

  async getState(sessionId: string): Promise<{ snapshot: Snapshot }> {
    const response = await this.checked(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/state`),
    );
    return response.json();
  }

  /** Report bytes exactly as served; the download path must not re-encode. */
  async getReport(sessionId: string, kind: ReportKind): Promise<Uint8Array> {
    const response = await this.checked(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/report?kind=${kind}`),
    );
    return new Uint8Array(await response.arrayBuffer());
  }

  subscribe(
    sessionId: string,
    onMessage: (message: unknown) => void,
    onError?: (error: unknown) => void,
  ): Subscription {
    return subscribeEvents(
      `${this.baseUrl}/sessions/${sessionId}/events`,
      onMessage,
      onError,
    );
  }
}
