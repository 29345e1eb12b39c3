import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiClient, ApiError } from "../src/api.js";
import { buildAnnotationDocument } from "../src/model.js";

type Call = { input: string; init?: RequestInit };

function mockFetch(responder: (input: string, init?: RequestInit) => Response) {
  const calls: Call[] = [];
  const impl = async (input: string, init?: RequestInit) => {
    calls.push({ input, init });
    return responder(input, init);
  };
  return { calls, impl };
}

const DOC = buildAnnotationDocument({
  targetSource: "http://mitan.in/bcp/raika",
  selector: null,
  creatorName: "Shanta",
  motivation: "describing",
  bodyText: "a note",
});

test("createAnnotation posts JSON-LD and reads Location and ETag", async () => {
  const { calls, impl } = mockFetch(
    () =>
      new Response(JSON.stringify({ id: "http://s.test/annotations/renarrations/abc" }), {
        status: 201,
        headers: {
          Location: "http://s.test/annotations/renarrations/abc",
          ETag: '"deadbeef"',
        },
      }),
  );
  const api = new ApiClient("", impl);
  const created = await api.createAnnotation(DOC);
  assert.equal(created.id, "http://s.test/annotations/renarrations/abc");
  assert.equal(created.version, "deadbeef");
  assert.equal(calls[0]!.input, "/annotations/");
  assert.equal(calls[0]!.init?.method, "POST");
  const sent = JSON.parse(String(calls[0]!.init?.body));
  assert.equal(sent.motivation, "describing");
});

test("server rejections become ApiError with field-level detail", async () => {
  const { impl } = mockFetch(
    () =>
      new Response(
        JSON.stringify({ error: "invalid-annotation", detail: "body: at least one body required" }),
        { status: 400 },
      ),
  );
  const api = new ApiClient("", impl);
  await assert.rejects(
    api.createAnnotation(DOC),
    (problem: ApiError) =>
      problem instanceof ApiError &&
      problem.status === 400 &&
      problem.code === "invalid-annotation" &&
      problem.detail.includes("body"),
  );
});

test("search builds its query from the supplied filters only", async () => {
  const { calls, impl } = mockFetch(
    () => new Response(JSON.stringify({ items: [], total: 0 }), { status: 200 }),
  );
  const api = new ApiClient("", impl);
  await api.search("http://mitan.in/bcp/raika", { lang: "kn" });
  const url = new URL(calls[0]!.input, "http://client.test");
  assert.equal(url.pathname, "/search");
  assert.equal(url.searchParams.get("target"), "http://mitan.in/bcp/raika");
  assert.equal(url.searchParams.get("lang"), "kn");
  assert.equal(url.searchParams.get("motivation"), null);
});

test("compose returns the document untouched plus the provenance link", async () => {
  const body = "<html><body><p>exact bytes</p></body></html>";
  const { impl } = mockFetch(
    () =>
      new Response(body, {
        status: 200,
        headers: {
          "Content-Type": "text/html; charset=utf-8",
          "X-Renarration-Provenance": "/compose/provenance?target=x&lang=kn",
        },
      }),
  );
  const api = new ApiClient("", impl);
  const result = await api.compose("http://x.test/doc", { languages: ["kn"] });
  assert.equal(result.document, body);
  assert.equal(result.provenanceUrl, "/compose/provenance?target=x&lang=kn");
});

test("pathOf maps minted IRIs onto same-origin request paths", () => {
  const api = new ApiClient("");
  assert.equal(
    api.pathOf("http://s.test/annotations/renarrations/abc"),
    "/annotations/renarrations/abc",
  );
});

test("errors with non-JSON bodies still raise with the status text", async () => {
  const { impl } = mockFetch(() => new Response("gateway meltdown", { status: 502, statusText: "Bad Gateway" }));
  const api = new ApiClient("", impl);
  await assert.rejects(
    api.snapshots(),
    (problem: ApiError) => problem instanceof ApiError && problem.status === 502,
  );
});
