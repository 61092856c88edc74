// Step-level list diff (LCS) used to show how a follow-up revised a procedure.

export interface DiffOp {
  kind: "same" | "removed" | "added";
  text: string;
}

export function diffSteps(before: string[], after: string[]): DiffOp[] {
  const n = before.length;
  const m = after.length;
  // lcs[i][j] = LCS length of before[i:] and after[j:]
  const lcs: number[][] = Array.from({ length: n + 1 }, () => new Array(m + 1).fill(0));
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      lcs[i][j] =
        before[i] === after[j]
          ? lcs[i + 1][j + 1] + 1
          : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  const ops: DiffOp[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (before[i] === after[j]) {
      ops.push({ kind: "same", text: before[i] });
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      ops.push({ kind: "removed", text: before[i] });
      i++;
    } else {
      ops.push({ kind: "added", text: after[j] });
      j++;
    }
  }
  while (i < n) ops.push({ kind: "removed", text: before[i++] });
  while (j < m) ops.push({ kind: "added", text: after[j++] });
  return ops;
}
