// Token-level diff between the input and the simplified output, used to
// highlight what the model kept, dropped and introduced.

export type DiffOp = "equal" | "delete" | "insert";

export interface DiffSpan {
  op: DiffOp;
  token: string;
}

/** Longest-common-subsequence diff over token arrays. Deletions come from
 * the source, insertions from the output, emitted in output-then-source
 * order at each divergence. */
export function diffTokens(source: string[], output: string[]): DiffSpan[] {
  const n = source.length;
  const m = output.length;
  const lcs: number[][] = Array.from({ length: n + 1 }, () =>
    new Array<number>(m + 1).fill(0),
  );
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      lcs[i][j] = source[i] === output[j]
        ? lcs[i + 1][j + 1] + 1
        : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  const spans: DiffSpan[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (source[i] === output[j]) {
      spans.push({ op: "equal", token: source[i] });
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      spans.push({ op: "delete", token: source[i] });
      i++;
    } else {
      spans.push({ op: "insert", token: output[j] });
      j++;
    }
  }
  for (; i < n; i++) spans.push({ op: "delete", token: source[i] });
  for (; j < m; j++) spans.push({ op: "insert", token: output[j] });
  return spans;
}

export function diffStats(spans: DiffSpan[]): { kept: number; dropped: number; added: number } {
  let kept = 0;
  let dropped = 0;
  let added = 0;
  for (const span of spans) {
    if (span.op === "equal") kept++;
    else if (span.op === "delete") dropped++;
    else added++;
  }
  return { kept, dropped, added };
}
