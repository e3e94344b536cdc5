import { ServiceClient } from './api.js';
import { ControlPanel, buttonStates } from './controls.js';
import { eetColumnSignatures, machineColors } from './csv.js';
import { parseReport, sortRows, tableToHtml, triggerDownload } from './reportView.js';
import { SessionStore } from './store.js';
import { buildScene, sceneToHtml } from './topology.js';
import type { ReportKind, StreamMessage } from './types.js';
import { ALL_POLICIES, IMMEDIATE_POLICIES, REPORT_KINDS } from './types.js';

// Browser bootstrap: wires the DOM to the store / control panel. All
// simulation truth arrives via the event stream; this file only renders.

const $ = <T extends HTMLElement>(id: string): T => {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing element #${id}`);
  return element as T;
};

const serviceBase = (window as { HETSIM_SERVICE?: string }).HETSIM_SERVICE ?? '';
const client = new ServiceClient(serviceBase);
const store = new SessionStore();

let panel: ControlPanel | null = null;
let sessionId: string | null = null;
let colors: string[] = [];
let subscription: { close(): void } | null = null;
let reportKind: ReportKind = 'summary';
let reportSort = { column: -1, direction: 'asc' as 'asc' | 'desc' };
let reportBytes: Uint8Array | null = null;

function readFile(input: HTMLInputElement): Promise<string> {
  const file = input.files?.[0];
  if (!file) return Promise.reject(new Error(`choose a ${input.id} file`));
  return file.text();
}

function fillSelectors(): void {
  const policy = $('policy') as unknown as HTMLSelectElement;
  policy.innerHTML = ALL_POLICIES.map(
    (name) =>
      `<option value="${name}">${name} (${
        IMMEDIATE_POLICIES.includes(name) ? 'immediate' : 'batch'
      })</option>`,
  ).join('');
  policy.value = store.selectedPolicy;
  const kind = $('report-kind') as unknown as HTMLSelectElement;
  kind.innerHTML = REPORT_KINDS.map(
    (name) => `<option value="${name}">${name}</option>`,
  ).join('');
  kind.value = reportKind;
}

function renderEventLog(): void {
  const log = $('event-log');
  const rows = store.eventLog
    .slice(-200)
    .map(
      (event) =>
        `<div class="log-row"><span class="t">${event.time_s}s</span> ` +
        `<span class="k ${event.kind}">${event.kind}</span> ` +
        `${event.changes
          .map((c) => `t${c.task}: ${c.from}→${c.to}`)
          .join(', ')}</div>`,
    )
    .join('');
  log.innerHTML = rows || '<div class="log-row empty">no events yet</div>';
  log.scrollTop = log.scrollHeight;
  $('event-count').textContent = String(store.eventLog.length);
}

function render(): void {
  const snapshot = store.snapshot;
  $('notice').textContent = store.notice ?? '';
  if (!snapshot) return;
  $('topology').innerHTML = sceneToHtml(buildScene(snapshot, colors));
  renderEventLog();

  const states = buttonStates(store);
  ($('play') as HTMLButtonElement).disabled = !states.play;
  ($('step') as HTMLButtonElement).disabled = !states.step;
  ($('reset') as HTMLButtonElement).disabled = !states.reset;
  ($('speed') as unknown as HTMLInputElement).disabled = !states.speed;
  ($('policy') as unknown as HTMLSelectElement).disabled = !states.configEditable;
  const queue = $('queue-size') as unknown as HTMLInputElement;
  queue.disabled = !states.queueSizeEditable;
  if (store.immediateSelected) queue.value = 'inf';
  ($('play') as HTMLButtonElement).textContent =
    snapshot.mode === 'running' ? 'pause' : 'play';

  const finished = snapshot.mode === 'finished';
  ($('report-load') as HTMLButtonElement).disabled = !finished;
  ($('report-download') as HTMLButtonElement).disabled = !finished || !reportBytes;
  $('report-hint').textContent = finished
    ? ''
    : 'reports unlock when the run finishes';
}

async function createSession(): Promise<void> {
  try {
    const eetText = await readFile($('file-eet') as unknown as HTMLInputElement);
    const workloadText = await readFile(
      $('file-workload') as unknown as HTMLInputElement,
    );
    const machinesText = await readFile(
      $('file-machines') as unknown as HTMLInputElement,
    );
    const created = await client.createSession(
      { eet: eetText, workload: workloadText, machines: machinesText },
      {
        policy: store.selectedPolicy,
        queueSize: store.queueSize,
        seed: Number(($('seed') as unknown as HTMLInputElement).value || '0'),
      },
    );
    subscription?.close();
    sessionId = created.id;
    panel = new ControlPanel(client, store, sessionId);
    colors = machineColors(eetColumnSignatures(eetText));
    store.eventLog = [];
    reportBytes = null;
    store.applySnapshot(created.snapshot);
    subscription = client.subscribe(
      sessionId,
      (message) => store.applyMessage(message as StreamMessage),
      (error) => store.setNotice(`event stream error: ${error}`),
    );
    store.setNotice(null);
  } catch (error) {
    store.setNotice(String((error as Error).message ?? error));
  }
}

async function loadReport(): Promise<void> {
  if (!sessionId) return;
  try {
    reportBytes = await client.getReport(sessionId, reportKind);
    const text = new TextDecoder().decode(reportBytes);
    const tables = parseReport(text);
    $('report-tables').innerHTML = tables
      .map((table) => {
        const rows =
          reportSort.column >= 0
            ? sortRows(table.rows, reportSort.column, reportSort.direction)
            : table.rows;
        return tableToHtml({ header: table.header, rows }, reportSort.column);
      })
      .join('');
    render();
  } catch (error) {
    store.setNotice(String((error as Error).message ?? error));
  }
}

function wire(): void {
  fillSelectors();
  $('create').addEventListener('click', () => void createSession());
  $('play').addEventListener('click', () => void panel?.playPause());
  $('step').addEventListener('click', () => void panel?.step());
  $('reset').addEventListener('click', () => void panel?.reset());
  $('speed').addEventListener('change', (event) => {
    const value = Number((event.target as HTMLInputElement).value);
    if (value > 0) void panel?.setSpeed(value);
  });
  $('policy').addEventListener('change', (event) => {
    const value = (event.target as HTMLSelectElement).value;
    if (panel) void panel.setPolicy(value);
    else store.selectPolicy(value);
  });
  $('queue-size').addEventListener('change', (event) => {
    const value = (event.target as HTMLInputElement).value;
    if (panel) void panel.setQueueSize(value);
    else store.setQueueSize(value);
  });
  $('report-kind').addEventListener('change', (event) => {
    reportKind = (event.target as HTMLSelectElement).value as ReportKind;
    reportSort = { column: -1, direction: 'asc' };
    void loadReport();
  });
  $('report-load').addEventListener('click', () => void loadReport());
  $('report-download').addEventListener('click', () => {
    if (reportBytes) triggerDownload(reportBytes, `${reportKind}_report.csv`);
  });
  $('report-tables').addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const column = target.dataset?.col;
    if (column === undefined) return;
    const index = Number(column);
    reportSort = {
      column: index,
      direction:
        reportSort.column === index && reportSort.direction === 'asc'
          ? 'desc'
          : 'asc',
    };
    void loadReport();
  });
  store.subscribe(render);
}

wire();
