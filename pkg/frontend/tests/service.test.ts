/**
 * End-to-end run against a real oversight service process: the steep
 * scorer behind the reference bound, the borderline applicant ingested
 * after two unremarkable ones. Covers the acceptance path: the queue
 * pins the flagged case, the detail highlights exactly the skill
 * component, and a desk rejection is visible in the audit log within
 * one poll interval.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, OversightApi, type AuditEntry, type CaseDoc } from "../src/api.js";
import { componentDiff } from "../src/detail.js";
import { formatScore } from "../src/format.js";
import { POLL_INTERVAL_MS } from "../src/poll.js";
import { orderForQueue } from "../src/queue.js";

const PORT = 8873;
const BASE = `http://127.0.0.1:${PORT}`;
const JOHN = [0.5, 0.5, 0.5, 0.5, 0.2];
const FILLERS = [
  [0.5, 0.5, 0.5, 0.5, 0.7],
  [0.3, 0.4, 0.5, 0.6, 0.5],
];

let workdir: string;
let child: ChildProcess;
let serverLog = "";
let api: OversightApi;
let johnId: string;
let analyzed: CaseDoc[];

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/cases`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service never came up on ${BASE}\n${serverLog}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "oversight-ui-"));
  const contract = join(workdir, "fair.json");
  writeFileSync(
    contract,
    JSON.stringify({
      kind: "fairness",
      d_in: { name: "euclid-normalized", params: [5] },
      d_out: { name: "abs-diff-scalar", params: [] },
      f_segments: [
        [0.0, 0.01, 8.0, 0.001],
        [0.01, 0.1, 4.0, 0.001],
        [0.1, 1.0, 2.0, 0.001],
      ],
    }),
  );
  child = spawn(
    "dopingcheck",
    [
      "serve",
      "--system",
      "hr-steep",
      "--contract",
      contract,
      "--store",
      join(workdir, "store.jsonl"),
      "--host",
      "127.0.0.1",
      "--port",
      String(PORT),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  child.stdout?.on("data", (chunk) => (serverLog += chunk));
  child.stderr?.on("data", (chunk) => (serverLog += chunk));
  await waitForService();

  api = new OversightApi(BASE, "overseer-ui");
  const ingested: CaseDoc[] = [];
  for (const input of [...FILLERS, JOHN]) {
    ingested.push(await api.ingestCase(input));
  }
  johnId = ingested[2].id;
  analyzed = [];
  for (const doc of ingested) {
    analyzed.push(await api.analyzeCase(doc.id));
  }
}, 60_000);

afterAll(() => {
  child?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe("against a live steep-scorer service", () => {
  it("numbers the borderline case last and analyzes all three", () => {
    expect(johnId).toBe("case-000003");
    expect(analyzed).toHaveLength(3);
    for (const doc of analyzed) {
      expect(doc.status).toBe("analyzed");
      expect(doc.verdict).not.toBeNull();
    }
  });

  it("pins the flagged case on top of the queue even though it arrived last", async () => {
    const page = await api.listCases();
    expect(page.total).toBe(3);
    expect(page.cases.map((c) => c.id)).toEqual([
      "case-000001",
      "case-000002",
      "case-000003",
    ]);
    const ordered = orderForQueue(page.cases);
    expect(ordered[0].id).toBe(johnId);
    expect(ordered[0].flagged).toBe(true);
    expect(ordered.slice(1).every((c) => !c.flagged)).toBe(true);
    for (const c of page.cases) {
      expect(c.flagged).toBe(c.normalized_score !== null && c.normalized_score < 0);
    }
  });

  it("leaves the unremarkable cases unflagged at the top of the scale", async () => {
    for (const id of ["case-000001", "case-000002"]) {
      const doc = await api.getCase(id);
      expect(doc.flagged).toBe(false);
      expect(doc.normalized_score).toBe(1.0);
    }
  });

  it("highlights exactly the skill-mark component in the counterpart", async () => {
    const doc = await api.getCase(johnId);
    const verdict = doc.verdict!;
    expect(verdict.normalized_score).not.toBeNull();
    expect(verdict.normalized_score!).toBeLessThan(0);
    expect(formatScore(verdict.normalized_score)).toBe(verdict.normalized_score!.toFixed(3));

    const marks = componentDiff(doc.actual_input, verdict.counterpart.input);
    expect(marks).toEqual([false, false, false, false, true]);
    expect(verdict.counterpart.input[4]).toBeGreaterThan(0.12);
    expect(verdict.counterpart.input[4]).toBeLessThan(0.14);
    expect(verdict.counterpart.output).toBeLessThan(verdict.system_output);
  });

  it(
    "records a desk rejection and shows it in the audit log within one poll interval",
    async () => {
      const started = Date.now();
      const doc = await api.submitDecision(
        johnId,
        "desk-reject",
        "the gap to the synthetic counterpart is not explained by the marks",
      );
      let decidedEntry: AuditEntry | undefined;
      for (;;) {
        const entries = await api.audit();
        decidedEntry = entries.find((e) => e.event === "decided" && e.case_id === johnId);
        if (decidedEntry || Date.now() - started > POLL_INTERVAL_MS) break;
        await new Promise((resolve) => setTimeout(resolve, 100));
      }
      const elapsed = Date.now() - started;

      expect(doc.status).toBe("decided");
      expect(doc.decision?.action).toBe("desk-reject");
      expect(decidedEntry).toBeDefined();
      expect(decidedEntry!.actor).toBe("overseer-ui");
      expect(elapsed).toBeLessThanOrEqual(POLL_INTERVAL_MS);
    },
    10_000,
  );

  it("refuses a second decision as a conflict", async () => {
    const again = api.submitDecision(johnId, "accept", "changed my mind");
    await expect(again).rejects.toBeInstanceOf(ApiError);
    await expect(again).rejects.toMatchObject({ status: 409 });
  });

  it("kept the audit trail strictly ordered", async () => {
    const entries = await api.audit();
    const sequences = entries.map((e) => e.sequence);
    expect(sequences).toEqual([...sequences].sort((a, b) => a - b));
    const events = entries.map((e) => e.event);
    expect(events.filter((e) => e === "ingested")).toHaveLength(3);
    expect(events.filter((e) => e === "analyzed")).toHaveLength(3);
    expect(events).toContain("flag-raised");
  });
});
