// @vitest-environment jsdom
//
// Full-stack journey: a real game server (spawned from the sibling Python
// package, seeded with the bundled "duo" family) driven purely through the
// UI — pins, buttons, textarea, SVG clicks — with the HTTP API as the only
// connection between the two.  Skipped when the server package is not
// installed.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { boot, type BootedApp } from "../src/main";

const REPO_ROOT = resolve(__dirname, "..", "..");
const DUO = join(REPO_ROOT, "data", "synthetic", "duo");
const PYTHON_OK = spawnSync("python3", ["-c", "import hexalect"], { timeout: 30_000 }).status === 0;

function freePort(): Promise<number> {
  return new Promise((res, rej) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address();
      if (address && typeof address === "object") {
        const port = address.port;
        srv.close(() => res(port));
      } else {
        srv.close(() => rej(new Error("no port")));
      }
    });
  });
}

async function waitFor<T>(probe: () => T | null | undefined | false, what: string, timeout = 30_000): Promise<T> {
  const start = Date.now();
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() - start > timeout) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 25));
  }
}

describe.skipIf(!PYTHON_OK)("live server journey", () => {
  let workDir: string;
  let server: ChildProcess | undefined;
  let base: string;
  let app: BootedApp;
  let root: HTMLElement;

  const getJson = async (path: string) => {
    const response = await fetch(base + path);
    if (!response.ok) throw new Error(`${path} -> ${response.status}`);
    return response.json();
  };

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), "hexalect-ui-e2e-"));
    const store = join(workDir, "store");
    const run = (args: string[]) => {
      const result = spawnSync("python3", ["-m", "hexalect", ...args], {
        cwd: REPO_ROOT,
        timeout: 120_000,
        encoding: "utf8",
      });
      if (result.status !== 0) {
        throw new Error(`hexalect ${args[0]} failed: ${result.stdout}\n${result.stderr}`);
      }
    };
    run([
      "ingest",
      "--data", store,
      "--family", "duo",
      "--registry", join(DUO, "registry.json"),
      "--corpus", join(DUO, "corpus.jsonl"),
      "--divisions", join(DUO, "divisions.json"),
    ]);
    run(["train", "--data", store, "--family", "duo", "--seed", "0"]);
    run(["rescore", "--data", store, "--family", "duo"]);

    const port = await freePort();
    base = `http://127.0.0.1:${port}`;
    const config = join(workDir, "service.json");
    writeFileSync(
      config,
      JSON.stringify({
        data_dir: store,
        host: "127.0.0.1",
        port,
        rng_seed: 11,
        retrain_mode: "sync",
        retrain_threshold: 1_000_000,
      }),
    );
    server = spawn("python3", ["-m", "hexalect", "serve", "--config", config], {
      cwd: REPO_ROOT,
      stdio: ["ignore", "pipe", "pipe"],
    });

    const deadline = Date.now() + 30_000;
    for (;;) {
      try {
        const health = await fetch(`${base}/api/health`);
        if (health.ok) break;
      } catch {
        // not up yet
      }
      if (Date.now() > deadline) throw new Error("server did not come up");
      await new Promise((r) => setTimeout(r, 200));
    }

    root = document.createElement("div");
    document.body.append(root);
    app = boot(root, {
      apiBase: base,
      fetchFn: (url, init) => fetch(url, init),
      confirmFn: () => true,
    });
  }, 180_000);

  afterAll(() => {
    server?.kill();
    if (workDir) rmSync(workDir, { recursive: true, force: true });
  });

  const q = <E extends Element>(selector: string) => root.querySelector<E>(selector);
  const badgeLevel = () => q<HTMLElement>("[data-role=difficulty-badge]")?.getAttribute("data-level");

  function typeRewrite(text: string): void {
    const field = q<HTMLTextAreaElement>(".rewrite-input")!;
    field.value = text;
    field.dispatchEvent(new Event("input", { bubbles: true }));
  }

  function stubRect(svg: Element): void {
    (svg as { getBoundingClientRect(): DOMRect }).getBoundingClientRect = () =>
      ({ left: 0, top: 0, width: 200, height: 200, right: 200, bottom: 200, x: 0, y: 0, toJSON: () => ({}) }) as DOMRect;
  }

  function mouse(target: Element, type: string, clientX: number, clientY: number): void {
    target.dispatchEvent(new MouseEvent(type, { clientX, clientY, bubbles: true }));
  }

  it("walks entry → choice → quiz, and a confirmed review raises the badge to NORMAL", async () => {
    const pin = await waitFor(() => q<HTMLButtonElement>("button.pin[data-family=duo]"), "family pin");
    pin.click();

    const quizCard = await waitFor(() => q<HTMLButtonElement>("button.choice-quiz"), "choice card");
    quizCard.click();

    await waitFor(() => q<HTMLTextAreaElement>(".rewrite-input"), "quiz board");
    expect(badgeLevel()).toBe("EASY");
    expect(q(".standard-text")!.textContent!.length).toBeGreaterThan(0);

    typeRewrite("zuna belo neppo kera");
    q<HTMLButtonElement>("button.submit")!.click();

    await waitFor(() => q(".review-question"), "review question");
    // the prediction map + legend arrived with the submission
    expect(root.querySelectorAll(".quizmap [data-layer=regions] path").length).toBeGreaterThan(0);
    expect(root.querySelectorAll(".legend-row").length).toBeGreaterThan(0);

    q<HTMLButtonElement>("button.review-yes")!.click();
    await waitFor(() => badgeLevel() === "NORMAL", "badge at NORMAL");
    // a fresh round began
    await waitFor(() => {
      const field = q<HTMLTextAreaElement>(".rewrite-input");
      return field && field.value === "";
    }, "next round board");
  }, 60_000);

  it("creating a dialect via none-of-the-above with a lasso edit persists through the API", async () => {
    const versionBefore = (await getJson("/api/admin/difficulty/duo")).model_version as number;

    typeRewrite("zuna belo neppo wego");
    q<HTMLButtonElement>("button.submit")!.click();
    await waitFor(() => q<HTMLButtonElement>("button.review-no"), "review question");
    q<HTMLButtonElement>("button.review-no")!.click();

    const newRadio = await waitFor(
      () => q<HTMLInputElement>('input[value="__new__"]'),
      "none-of-the-above option",
    );
    newRadio.click();

    const svg = await waitFor(() => q<SVGSVGElement>("svg.editmap"), "hex editor");
    stubRect(svg);

    // first use: the onboarding overlay must be shown, and dismissed by hand
    const overlay = await waitFor(() => q<HTMLElement>(".onboarding"), "lasso onboarding");
    overlay.querySelector<HTMLButtonElement>(".onboarding-dismiss")!.click();
    expect(q(".onboarding")).toBeNull();

    // draw a loop around the middle of the map
    mouse(svg, "mousedown", 60, 140);
    mouse(svg, "mousemove", 140, 140);
    mouse(svg, "mousemove", 140, 60);
    mouse(svg, "mouseup", 60, 60);

    await waitFor(() => root.querySelectorAll("[data-layer=cells] path").length > 0, "lassoed cells");
    const drawn = [...root.querySelectorAll<SVGPathElement>("[data-layer=cells] path")]
      .map((p) => p.getAttribute("data-cell")!)
      .sort();
    expect(drawn.length).toBeGreaterThan(10); // a 0.8°×0.8° loop over 0.1° hexes

    q<HTMLInputElement>(".dialect-name-input")!.value = "wegoland";
    q<HTMLButtonElement>("button.save")!.click();

    // the save triggers a synchronous retrain (the label set grew), so the
    // admin difficulty report reflects it as soon as the UI moves on
    await waitFor(() => app.ctx.store.get().stage === "QUIZ", "round advancing", 60_000);
    await waitFor(() => q<HTMLTextAreaElement>(".rewrite-input")?.value === "", "next round board");

    const labels = (await getJson("/api/families/duo/labels")) as {
      name: string;
      cells: string[];
    }[];
    const created = labels.find((l) => l.name === "wegoland");
    expect(created).toBeDefined();
    expect([...created!.cells].sort()).toEqual(drawn);

    const versionAfter = (await getJson("/api/admin/difficulty/duo")).model_version as number;
    expect(versionAfter).toBeGreaterThan(versionBefore);
  }, 120_000);

  it("plays a full three-item match round with scores and a recorded correction", async () => {
    const eventsBefore = (await getJson("/api/admin/stats/duo")).events as number;

    // back to the world map through the browser's address bar
    location.hash = "#/";
    window.dispatchEvent(new Event("hashchange"));
    const pin = await waitFor(() => q<HTMLButtonElement>("button.pin[data-family=duo]"), "family pin");
    pin.click();
    const matchCard = await waitFor(() => q<HTMLButtonElement>("button.choice-match"), "match card");
    matchCard.click();

    await waitFor(() => root.querySelectorAll("[data-layer=divisions] path").length > 0, "division map");
    const counterText = () => q<HTMLElement>("[data-role=match-counter]")?.textContent ?? "";
    expect(counterText()).toBe("Sentence 1 of 3");

    for (let item = 0; item < 3; item++) {
      await waitFor(() => counterText() === `Sentence ${item + 1} of 3`, `item ${item + 1}`);
      const divisions = [...root.querySelectorAll<SVGPathElement>("[data-layer=divisions] path")];
      divisions[item % divisions.length].dispatchEvent(new MouseEvent("click", { bubbles: true }));
      q<HTMLButtonElement>("button.match-submit")!.click();

      await waitFor(() => /Overlap score: \d+\.\d\d/.test(q(".match-status")?.textContent ?? ""), "score reveal");
      expect(root.querySelectorAll("[data-layer=divisions] path.reference").length).toBeGreaterThan(0);

      if (item === 1) {
        // disagree once: amend the selection and send a correction
        q<HTMLButtonElement>("button.disagree")!.click();
        const others = [...root.querySelectorAll<SVGPathElement>("[data-layer=divisions] path")];
        others[(item + 1) % others.length].dispatchEvent(new MouseEvent("click", { bubbles: true }));
        q<HTMLButtonElement>("button.correction-submit")!.click();
        await waitFor(() => q<HTMLButtonElement>("button.next"), "correction recorded");
        q<HTMLButtonElement>("button.next")!.click();
      } else {
        q<HTMLButtonElement>("button.agree")!.click();
      }
    }

    await waitFor(() => q(".match-mean"), "round summary");
    const rows = [...root.querySelectorAll(".match-summary li")].map((r) => r.textContent ?? "");
    expect(rows).toHaveLength(3);
    for (const row of rows) expect(row).toMatch(/Sentence \d: \d+\.\d\d/);
    expect(q(".match-mean")!.textContent).toMatch(/Average overlap: \d+\.\d\d/);

    // exactly the one disputed item recorded an event; plain answers did not
    const eventsAfter = (await getJson("/api/admin/stats/duo")).events as number;
    expect(eventsAfter).toBe(eventsBefore + 1);
  }, 120_000);
});
