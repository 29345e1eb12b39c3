/**
 * Drives the real Python service end-to-end: composition fetched through
 * the client equals the command line's output byte-for-byte, and a
 * renarration submitted the way the renarrator view does comes back with
 * the same selector it was drawn with.
 */

import assert from "node:assert/strict";
import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import path from "node:path";
import { after, before, test } from "node:test";
import { fileURLToPath } from "node:url";

import { ApiClient } from "../src/api.js";
import {
  buildAnnotationDocument,
  fragmentSelectorFor,
  quoteSelectorFor,
  rectangleFromDrag,
  selectorOf,
} from "../src/model.js";

const REPO = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..", "..");
const FIXTURES = path.join(REPO, "fixtures");
const BCP = "http://mitan.in/bcp/raika";
const IMAGE = "http://chaha.in/vijayanagara-royal-dasara/wrestlers.jpg";

let work: string;
let server: ReturnType<typeof spawn>;
let base: string;
let api: ApiClient;

function cli(...args: string[]): void {
  const run = spawnSync(
    "python3",
    ["-m", "renarrate.cli", "--store", path.join(work, "data"), ...args],
    { cwd: REPO, encoding: "utf-8" },
  );
  assert.equal(run.status, 0, `cli ${args.join(" ")} failed: ${run.stdout}${run.stderr}`);
}

async function freePort(): Promise<number> {
  return await new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, "127.0.0.1", () => {
      const { port } = probe.address() as net.AddressInfo;
      probe.close(() => resolve(port));
    });
    probe.on("error", reject);
  });
}

before(async () => {
  work = mkdtempSync(path.join(tmpdir(), "renarrate-web-"));

  cli("ingest", path.join(FIXTURES, "bcp_protocol.html"), "--source-iri", BCP);
  for (const name of ["paragraph_1_kn", "paragraph_3_kn", "paragraph_7_kn"]) {
    cli("annotate", path.join(FIXTURES, "bcp_renarrations", `${name}.jsonld`));
  }
  const fakeImage = path.join(work, "wrestlers.jpg");
  writeFileSync(fakeImage, Buffer.from([0xff, 0xd8, 0xff, 0xe0, 0x00, 0x10]));
  cli("ingest", fakeImage, "--source-iri", IMAGE, "--media-type", "image/jpeg");

  // the CLI reference rendition, written before the server starts
  cli("compose", BCP, "--lang", "kn", "--out", path.join(work, "cli-rendition.html"));

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    ["-m", "renarrate.cli", "--store", path.join(work, "data"), "--port", String(port), "serve"],
    { cwd: REPO, stdio: "ignore" },
  );
  const deadline = Date.now() + 15000;
  for (;;) {
    try {
      await fetch(`${base}/`);
      break;
    } catch {
      if (Date.now() > deadline) throw new Error("service never came up");
      await new Promise((r) => setTimeout(r, 100));
    }
  }
  api = new ApiClient(base);
});

after(() => {
  server?.kill();
});

test("reader view's document equals the command line's output byte-for-byte", async () => {
  const fromCli = readFileSync(path.join(work, "cli-rendition.html"));
  const result = await api.compose(BCP, { languages: ["kn"] });
  assert.ok(Buffer.from(result.document, "utf-8").equals(fromCli));

  const report = await api.provenance(result.provenanceUrl);
  assert.equal(report.substitutions.length, 3);
  assert.ok(report.substitutions.every((s) => s.method === "quote-exact" && s.confidence === 1));
});

test("profile with no matching language renders the untouched snapshot", async () => {
  const result = await api.compose(BCP, { languages: ["fr"] });
  const original = readFileSync(path.join(FIXTURES, "bcp_protocol.html"));
  assert.ok(Buffer.from(result.document, "utf-8").equals(original));
  const report = await api.provenance(result.provenanceUrl);
  assert.equal(report.substitutions.length, 0);
});

test("reordering profile languages changes which contribution wins", async () => {
  // add an English alternative for paragraph 1, newer than the Kannada one
  const paragraph1 =
    "The Raika of Rajasthan have herded camels across the Thar desert for many generations.";
  const english = buildAnnotationDocument({
    targetSource: BCP,
    selector: { type: "TextQuoteSelector", exact: paragraph1 },
    creatorName: "Morgan",
    motivation: "renarrating",
    bodyText: "The Raika people have raised camels in the Thar desert for a very long time.",
    language: "en",
    transformation: "simplification",
  });
  const created = await api.createAnnotation(english);

  const kannadaFirst = await api.compose(BCP, { languages: ["kn", "en"] });
  assert.ok(kannadaFirst.document.includes("ರಾಜಸ್ಥಾನದ"));
  const englishFirst = await api.compose(BCP, { languages: ["en", "kn"] });
  assert.ok(englishFirst.document.includes("raised camels in the Thar desert"));
  assert.ok(englishFirst.document.includes(created.id));
});

test("a rectangle drawn on the image snapshot round-trips through the store", async () => {
  // drag from (614, 385) up-left to (366, 186), as the view would capture it
  const rect = rectangleFromDrag(614, 385, 366, 186);
  assert.ok(rect);
  const doc = buildAnnotationDocument({
    targetSource: IMAGE,
    selector: fragmentSelectorFor(rect),
    creatorName: "Bhan",
    motivation: "describing",
    bodyText:
      "Wrestlers displaying their talents in front of the king, as sculpted on the walls of Mahanavami dibba.",
    language: "en",
  });
  const created = await api.createAnnotation(doc);
  assert.ok(created.id.includes("/annotations/renarrations/"));

  const found = await api.search(IMAGE);
  assert.equal(found.length, 1);
  const selector = selectorOf(found[0]!);
  assert.ok(selector && selector.type === "FragmentSelector");
  assert.equal(selector.value, "xywh=366,186,248,199");

  const fetched = await api.getAnnotation(created.id);
  assert.deepEqual(selectorOf(fetched), selector);
});

test("a text selection submitted with its context is findable by language", async () => {
  const paragraph4 =
    "Camel herds are treated as a shared trust between families rather than private property.";
  const start = paragraph4.indexOf("shared trust");
  const selector = quoteSelectorFor(paragraph4, start, start + "shared trust between families".length);
  const created = await api.createAnnotation(
    buildAnnotationDocument({
      targetSource: BCP,
      selector,
      creatorName: "Shanta",
      motivation: "renarrating",
      bodyText: "ಹಂಚಿಕೆಯ ಹೊಣೆ",
      language: "kn",
      transformation: "translation",
    }),
  );
  const found = await api.search(BCP, { lang: "kn" });
  assert.ok(found.some((doc) => doc.id === created.id));
  const roundTripped = selectorOf(found.find((doc) => doc.id === created.id)!);
  assert.deepEqual(roundTripped, selector);
});

test("server-rejected drafts surface their field-level detail", async () => {
  const sneaky = buildAnnotationDocument({
    targetSource: BCP,
    selector: null,
    creatorName: "x",
    motivation: "describing",
    bodyText: "fine so far",
  });
  // bypass client validation to simulate a stale client; break the target
  (sneaky.target as { source: string }).source = "not-an-iri";
  await assert.rejects(api.createAnnotation(sneaky), (problem: Error) =>
    problem.message.includes("target.source"),
  );
});
