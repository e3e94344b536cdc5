// Tiny CSV helpers. The service's files never need quoting (names are
// restricted to [A-Za-z0-9_-]+), so a plain split is exact.

export function parseCsv(text: string): string[][] {
  return text
    .split('\n')
    .map((line) => line.replace(/\r$/, ''))
    .filter((line) => line.trim() !== '')
    .map((line) => line.split(',').map((cell) => cell.trim()));
}

/**
 * Per-machine signature of its execution-time column. Machines with
 * identical columns are interchangeable (homogeneous), so the topology
 * view colors them identically.
 */
export function eetColumnSignatures(eetText: string): string[] {
  const rows = parseCsv(eetText);
  if (rows.length === 0) return [];
  const machineCount = rows[0].length - 1;
  const signatures: string[] = [];
  for (let m = 0; m < machineCount; m++) {
    signatures.push(rows.slice(1).map((row) => row[m + 1]).join('|'));
  }
  return signatures;
}

const PALETTE = [
  '#4e79a7',
  '#f28e2b',
  '#59a14f',
  '#e15759',
  '#b07aa1',
  '#76b7b2',
  '#edc948',
  '#9c755f',
];

/** Map each machine to a color; identical EET columns share a color. */
export function machineColors(signatures: string[]): string[] {
  const bySignature = new Map<string, string>();
  const colors: string[] = [];
  for (const signature of signatures) {
    let color = bySignature.get(signature);
    if (color === undefined) {
      color = PALETTE[bySignature.size % PALETTE.length];
      bySignature.set(signature, color);
    }
    colors.push(color);
  }
  return colors;
}
