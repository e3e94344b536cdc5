import type { Snapshot } from './types.js';

// Scene layout mirrors the system's flow left to right: incoming workload,
// batch queue, scheduler, machine lanes, then the canceled / missed bins.
// Everything shown comes straight from the latest snapshot.

export interface LaneScene {
  index: number;
  name: string;
  color: string;
  waiting: number[];
  executing: { task: number; progress: number } | null;
}

export interface Scene {
  clockS: number;
  mode: string;
  batch: number[];
  pending: number;
  lanes: LaneScene[];
  completed: number;
  canceled: number;
  missed: number;
  total: number;
}

export function buildScene(snapshot: Snapshot, colors: string[]): Scene {
  return {
    clockS: snapshot.clock_s,
    mode: snapshot.mode,
    batch: [...snapshot.batch],
    pending: snapshot.counters.pending,
    lanes: snapshot.machines.map((machine) => ({
      index: machine.index,
      name: machine.name,
      color: colors[machine.index] ?? '#888888',
      waiting: [...machine.waiting],
      executing: machine.executing
        ? {
            task: machine.executing.task,
            progress: Math.min(1, Math.max(0, machine.executing.progress)),
          }
        : null,
    })),
    completed: snapshot.counters.completed,
    canceled: snapshot.counters.canceled,
    missed: snapshot.counters.missed,
    total: snapshot.counters.total,
  };
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function taskChips(ids: number[], limit = 12): string {
  const shown = ids.slice(0, limit);
  const more = ids.length - shown.length;
  const chips = shown
    .map((id) => `<span class="chip">t${id}</span>`)
    .join('');
  return chips + (more > 0 ? `<span class="chip more">+${more}</span>` : '');
}

/** Pure HTML rendering so tests can assert on the scene without a DOM. */
export function sceneToHtml(scene: Scene): string {
  const lanes = scene.lanes
    .map((lane) => {
      const executing = lane.executing
        ? `<div class="executing">
             <span class="chip active">t${lane.executing.task}</span>
             <div class="progress"><div class="bar" style="width:${(
               lane.executing.progress * 100
             ).toFixed(1)}%"></div></div>
           </div>`
        : '<div class="executing idle">idle</div>';
      return `<div class="lane" data-machine="${lane.index}">
        <div class="lane-label" style="border-color:${lane.color}">
          <span class="dot" style="background:${escapeHtml(lane.color)}"></span>
          ${escapeHtml(lane.name)}
        </div>
        <div class="queue">${taskChips(lane.waiting)}</div>
        ${executing}
      </div>`;
    })
    .join('');
  return `<div class="clock">t = ${scene.clockS.toFixed(6).replace(/0+$/, '').replace(/\.$/, '')} s
      <span class="mode ${scene.mode}">${scene.mode}</span></div>
    <div class="flow">
      <div class="stage">
        <h3>workload</h3>
        <div class="bin">${scene.pending} pending</div>
      </div>
      <div class="stage">
        <h3>batch queue</h3>
        <div class="queue batch">${taskChips(scene.batch)}</div>
        <div class="count">${scene.batch.length} waiting</div>
      </div>
      <div class="stage lanes">
        <h3>machines</h3>
        ${lanes}
      </div>
      <div class="stage">
        <h3>resolved</h3>
        <div class="bin ok">completed <b data-counter="completed">${scene.completed}</b></div>
        <div class="bin warn">canceled <b data-counter="canceled">${scene.canceled}</b></div>
        <div class="bin bad">missed <b data-counter="missed">${scene.missed}</b></div>
      </div>
    </div>`;
}
