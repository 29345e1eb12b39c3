import assert from "node:assert/strict";
import { test } from "node:test";

import {
  ANNOTATION_CONTEXT,
  buildAnnotationDocument,
  codePointSlice,
  collapseWhitespace,
  composeQuery,
  fragmentSelectorFor,
  quoteSelectorFor,
  rectangleFromDrag,
  SelectionDraft,
  selectorOf,
  validateDraft,
} from "../src/model.js";

const TEXT =
  "The Raika of Rajasthan have herded camels across the Thar desert for many generations.";

function draft(overrides: Partial<SelectionDraft> = {}): SelectionDraft {
  return {
    targetSource: "http://mitan.in/bcp/raika",
    selector: { type: "TextQuoteSelector", exact: "herded camels" },
    creatorName: "Shanta",
    motivation: "renarrating",
    bodyText: "ಒಂಟೆಗಳನ್ನು ಮೇಯಿಸುತ್ತಾರೆ",
    language: "kn",
    transformation: "translation",
    ...overrides,
  };
}

test("quote selector context lengths are exact", () => {
  const start = TEXT.indexOf("herded");
  const end = start + "herded camels".length;
  const selector = quoteSelectorFor(TEXT, start, end);
  assert.equal(Array.from(selector.prefix!).length, 28); // document starts 28 points before
  assert.ok(TEXT.startsWith(selector.prefix!));
  assert.equal(Array.from(selector.suffix!).length, 32);
  assert.ok(TEXT.slice(end).startsWith(selector.suffix!));
});

test("quote selector counts code points, not UTF-16 units", () => {
  const kannada = "ಕ\u{10348}ನಡ ಪಠ್ಯ ಇಲ್ಲಿ ಇದೆ"; // includes an astral code point
  const points = Array.from(kannada);
  const selector = quoteSelectorFor(kannada, 2, 5);
  assert.equal(selector.exact, points.slice(2, 5).join(""));
});

test("quote selector omits empty context at document edges", () => {
  const selector = quoteSelectorFor("word", 0, 4);
  assert.equal(selector.prefix, undefined);
  assert.equal(selector.suffix, undefined);
});

test("quote selector rejects out-of-range selections", () => {
  assert.throws(() => quoteSelectorFor("abc", 2, 2), RangeError);
  assert.throws(() => quoteSelectorFor("abc", 0, 99), RangeError);
});

test("rectangle normalizes corner order and scales to natural pixels", () => {
  assert.deepEqual(rectangleFromDrag(614, 385, 366, 186), { x: 366, y: 186, w: 248, h: 199 });
  assert.deepEqual(rectangleFromDrag(183, 93, 307, 192.5, 2), { x: 366, y: 186, w: 248, h: 199 });
});

test("degenerate drags produce no rectangle", () => {
  assert.equal(rectangleFromDrag(10, 10, 10, 40), null);
  assert.equal(rectangleFromDrag(10, 10, 10.1, 10.2), null);
});

test("fragment selector renders the xywh string", () => {
  const selector = fragmentSelectorFor({ x: 366, y: 186, w: 248, h: 199 });
  assert.equal(selector.value, "xywh=366,186,248,199");
  assert.equal(selector.conformsTo, "http://www.w3.org/TR/media-frags/");
});

test("draft validation blocks empty bodies client-side", () => {
  const problems = validateDraft(draft({ bodyText: undefined, bodyIri: undefined }));
  assert.ok(problems.some((p) => p.startsWith("body:")));
});

test("draft validation requires transformation for renarrations only", () => {
  assert.ok(
    validateDraft(draft({ transformation: undefined }))
      .some((p) => p.startsWith("transformation:")),
  );
  assert.ok(
    validateDraft(draft({ motivation: "describing" }))
      .some((p) => p.startsWith("transformation:")),
  );
  assert.deepEqual(validateDraft(draft({ motivation: "describing", transformation: undefined })), []);
});

test("draft validation checks literacy level range", () => {
  assert.ok(validateDraft(draft({ literacyLevel: 9 })).some((p) => p.includes("literacyLevel")));
  assert.deepEqual(validateDraft(draft({ literacyLevel: 3 })), []);
});

test("document builder emits the annotation shape the server expects", () => {
  const doc = buildAnnotationDocument(draft({ audienceLanguages: ["kn"] }));
  assert.deepEqual(doc.creator, { name: "Shanta" });
  assert.equal(doc.motivation, "renarrating");
  assert.equal(doc.transformation, "translation");
  assert.deepEqual(doc.audience, { languages: ["kn"] });
  assert.deepEqual(doc.body, {
    type: "TextualBody",
    value: "ಒಂಟೆಗಳನ್ನು ಮೇಯಿಸುತ್ತಾರೆ",
    language: "kn",
  });
  assert.deepEqual(doc.target, {
    source: "http://mitan.in/bcp/raika",
    selector: { type: "TextQuoteSelector", exact: "herded camels" },
  });
  assert.ok(Array.isArray(doc["@context"]));
  assert.equal((doc["@context"] as unknown[])[0], ANNOTATION_CONTEXT);
});

test("document builder uses the plain context without extension fields", () => {
  const doc = buildAnnotationDocument(
    draft({ motivation: "describing", transformation: undefined }),
  );
  assert.equal(doc["@context"], ANNOTATION_CONTEXT);
  assert.equal(doc.transformation, undefined);
});

test("document builder carries external bodies as ids", () => {
  const doc = buildAnnotationDocument(
    draft({ bodyText: undefined, bodyIri: "http://media.test/narration.mp3" }),
  );
  assert.deepEqual(doc.body, { id: "http://media.test/narration.mp3", language: "kn" });
});

test("document builder refuses invalid drafts", () => {
  assert.throws(() => buildAnnotationDocument(draft({ creatorName: "  " })), /creator/);
});

test("compose query encodes the ordered profile", () => {
  const query = composeQuery("http://mitan.in/bcp/raika", {
    languages: ["kn", "en"],
    medium: "text",
    literacyLevel: 3,
    fallback: "tagging",
  });
  const params = new URLSearchParams(query);
  assert.equal(params.get("target"), "http://mitan.in/bcp/raika");
  assert.equal(params.get("lang"), "kn,en");
  assert.equal(params.get("medium"), "text");
  assert.equal(params.get("level"), "3");
  assert.equal(params.get("fallback"), "tagging");
});

test("whitespace collapse mirrors the server's extraction rule", () => {
  assert.equal(collapseWhitespace("  the \n\n lion\tand   mouse "), "the lion and mouse");
  assert.equal(collapseWhitespace(" a  b ", false), " a b ");
});

test("code point slice handles negative starts", () => {
  assert.equal(codePointSlice("abcdef", -3), "def");
  assert.equal(codePointSlice("abcdef", 1, 3), "bc");
});

test("selectorOf reads the selector back from a fetched document", () => {
  const doc = buildAnnotationDocument(draft());
  assert.deepEqual(selectorOf(doc), { type: "TextQuoteSelector", exact: "herded camels" });
  assert.equal(selectorOf({ ...doc, target: "http://x.test/whole" }), null);
});
