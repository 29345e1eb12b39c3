/**
 * Renarrator view: select a fragment of a snapshot (text selection on
 * textual documents, a dragged rectangle on images), fill in the
 * contribution form, and submit the annotation. Server-side rejections
 * surface their field-level detail next to the form.
 */

import { ApiClient, ApiError, SnapshotInfo } from "./api.js";
import {
  QUOTE_CONTEXT_CODE_POINTS,
  SelectionDraft,
  Selector,
  Transformation,
  buildAnnotationDocument,
  codePointSlice,
  collapseWhitespace,
  fragmentSelectorFor,
  rectangleFromDrag,
  validateDraft,
} from "./model.js";

export class RenarratorView {
  private root: HTMLElement;
  private api: ApiClient;
  private snapshot: SnapshotInfo | null = null;
  private selector: Selector | null = null;

  constructor(root: HTMLElement, api: ApiClient) {
    this.root = root;
    this.api = api;
  }

  async render(): Promise<void> {
    const snapshots = await this.api.snapshots();
    this.root.innerHTML = `
      <form class="controls">
        <label>Snapshot
          <select id="snapshot-pick">
            <option value="">choose...</option>
            ${snapshots
              .map(
                (s, i) =>
                  `<option value="${i}">${escapeHtml(s.source)} (${escapeHtml(s.mediaType)})</option>`,
              )
              .join("")}
          </select>
        </label>
      </form>
      <div class="workbench">
        <div class="document-pane" id="document-pane">
          <p class="status">${snapshots.length ? "Pick a snapshot to renarrate." : "No snapshots yet; ingest a document first."}</p>
        </div>
        <form class="draft-form" id="draft-form">
          <p class="selection-display" id="selection-display">No fragment selected (whole resource).</p>
          <label>Your name <input name="creatorName" required></label>
          <label>Motivation
            <select name="motivation">
              <option value="renarrating">renarrating</option>
              <option value="describing">describing</option>
            </select>
          </label>
          <label>Transformation
            <select name="transformation">
              <option value="translation">translation</option>
              <option value="simplification">simplification</option>
              <option value="elaboration">elaboration</option>
              <option value="media-substitution">media-substitution</option>
              <option value="">none</option>
            </select>
          </label>
          <label>Alternative text <textarea name="bodyText" rows="4"></textarea></label>
          <label>... or link a resource <input name="bodyIri" placeholder="http://"></label>
          <label>Language <input name="language" placeholder="kn"></label>
          <label>Audience languages <input name="audienceLanguages" placeholder="kn,rj"></label>
          <label>Audience literacy level <input name="literacyLevel" type="number" min="1" max="5"></label>
          <button type="submit">Contribute</button>
          <ul class="problems" id="draft-problems"></ul>
          <p class="status" id="draft-status"></p>
        </form>
      </div>
    `;
    const pick = this.root.querySelector<HTMLSelectElement>("#snapshot-pick")!;
    pick.addEventListener("change", () => {
      const chosen = snapshots[Number(pick.value)];
      if (chosen) void this.showSnapshot(chosen);
    });
    const form = this.root.querySelector<HTMLFormElement>("#draft-form")!;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit(form);
    });
  }

  private async showSnapshot(info: SnapshotInfo): Promise<void> {
    this.snapshot = info;
    this.selector = null;
    this.displaySelection();
    const pane = this.root.querySelector<HTMLElement>("#document-pane")!;
    pane.textContent = "";
    if (info.mediaType.startsWith("image/")) {
      this.mountImageSelection(pane, info);
    } else {
      await this.mountTextSelection(pane, info);
    }
  }

  private async mountTextSelection(pane: HTMLElement, info: SnapshotInfo): Promise<void> {
    const raw = await this.api.snapshotText(info.id);
    if (info.mediaType.startsWith("text/html")) {
      const frame = document.createElement("iframe");
      frame.className = "document-frame";
      frame.srcdoc = raw;
      pane.appendChild(frame);
      frame.addEventListener("load", () => {
        frame.contentDocument?.addEventListener("selectionchange", () => {
          this.selector = quoteFromRenderedSelection(frame);
          this.displaySelection();
        });
      });
    } else {
      // plain text: show the collapsed form so offsets equal server text
      const visible = collapseWhitespace(raw);
      const pre = document.createElement("pre");
      pre.className = "document-plain";
      pre.textContent = visible;
      pane.appendChild(pre);
      document.addEventListener("selectionchange", () => {
        this.selector = quoteFromPlainSelection(pre, visible);
        this.displaySelection();
      });
    }
  }

  private mountImageSelection(pane: HTMLElement, info: SnapshotInfo): void {
    const wrap = document.createElement("div");
    wrap.className = "image-wrap";
    const img = document.createElement("img");
    img.src = this.api.snapshotContentUrl(info.id);
    img.draggable = false;
    const box = document.createElement("div");
    box.className = "drag-box";
    box.hidden = true;
    wrap.append(img, box);
    pane.appendChild(wrap);

    let origin: { x: number; y: number } | null = null;
    wrap.addEventListener("mousedown", (event) => {
      const at = relativeTo(wrap, event);
      origin = at;
      box.hidden = false;
      Object.assign(box.style, { left: `${at.x}px`, top: `${at.y}px`, width: "0", height: "0" });
    });
    wrap.addEventListener("mousemove", (event) => {
      if (!origin) return;
      const at = relativeTo(wrap, event);
      Object.assign(box.style, {
        left: `${Math.min(origin.x, at.x)}px`,
        top: `${Math.min(origin.y, at.y)}px`,
        width: `${Math.abs(at.x - origin.x)}px`,
        height: `${Math.abs(at.y - origin.y)}px`,
      });
    });
    wrap.addEventListener("mouseup", (event) => {
      if (!origin) return;
      const at = relativeTo(wrap, event);
      const scale = img.naturalWidth > 0 && img.clientWidth > 0
        ? img.naturalWidth / img.clientWidth
        : 1;
      const rect = rectangleFromDrag(origin.x, origin.y, at.x, at.y, scale);
      origin = null;
      this.selector = rect ? fragmentSelectorFor(rect) : null;
      this.displaySelection();
    });
  }

  private displaySelection(): void {
    const display = this.root.querySelector<HTMLElement>("#selection-display")!;
    if (!this.selector) {
      display.textContent = "No fragment selected (whole resource).";
    } else if (this.selector.type === "TextQuoteSelector") {
      display.textContent = `Quote: "${this.selector.exact}"`;
    } else {
      display.textContent = `Region: ${this.selector.value}`;
    }
  }

  private draftFrom(form: HTMLFormElement): SelectionDraft | null {
    if (!this.snapshot) return null;
    const data = new FormData(form);
    const text = (value: string) => String(data.get(value) ?? "").trim();
    const draft: SelectionDraft = {
      targetSource: this.snapshot.source,
      selector: this.selector,
      creatorName: text("creatorName"),
      motivation: text("motivation") === "describing" ? "describing" : "renarrating",
    };
    if (text("bodyText")) draft.bodyText = text("bodyText");
    if (text("bodyIri")) draft.bodyIri = text("bodyIri");
    if (text("language")) draft.language = text("language");
    const transformation = text("transformation");
    if (draft.motivation === "renarrating" && transformation) {
      draft.transformation = transformation as Transformation;
    }
    const audienceLanguages = text("audienceLanguages");
    if (audienceLanguages) {
      draft.audienceLanguages = audienceLanguages.split(",").map((t) => t.trim()).filter(Boolean);
    }
    if (text("literacyLevel")) draft.literacyLevel = Number(text("literacyLevel"));
    return draft;
  }

  private async submit(form: HTMLFormElement): Promise<void> {
    const problems = this.root.querySelector<HTMLElement>("#draft-problems")!;
    const status = this.root.querySelector<HTMLElement>("#draft-status")!;
    problems.textContent = "";
    status.textContent = "";
    const draft = this.draftFrom(form);
    if (!draft) {
      status.textContent = "Pick a snapshot first.";
      return;
    }
    const blocking = validateDraft(draft);
    if (blocking.length) {
      for (const problem of blocking) {
        const li = document.createElement("li");
        li.textContent = problem;
        problems.appendChild(li);
      }
      return;
    }
    try {
      const created = await this.api.createAnnotation(buildAnnotationDocument(draft));
      status.textContent = `Stored as ${created.id}`;
      form.reset();
      this.selector = null;
      this.displaySelection();
    } catch (problem) {
      if (problem instanceof ApiError) {
        for (const detail of problem.detail.split("; ")) {
          const li = document.createElement("li");
          li.textContent = detail;
          problems.appendChild(li);
        }
      } else {
        status.textContent = `Submission failed (network?): ${(problem as Error).message}. Retry when reachable.`;
      }
    }
  }
}

function relativeTo(el: HTMLElement, event: MouseEvent): { x: number; y: number } {
  const bounds = el.getBoundingClientRect();
  return { x: event.clientX - bounds.left, y: event.clientY - bounds.top };
}

/** Quote + 32-code-point context from a selection in a rendered iframe. */
function quoteFromRenderedSelection(frame: HTMLIFrameElement): Selector | null {
  const win = frame.contentWindow;
  const doc = frame.contentDocument;
  if (!win || !doc || !doc.body) return null;
  const selection = win.getSelection();
  if (!selection || selection.isCollapsed || selection.rangeCount === 0) return null;
  const range = selection.getRangeAt(0);
  const exact = collapseWhitespace(range.toString());
  if (!exact) return null;
  const before = doc.createRange();
  before.setStart(doc.body, 0);
  before.setEnd(range.startContainer, range.startOffset);
  const after = doc.createRange();
  after.setStart(range.endContainer, range.endOffset);
  after.setEnd(doc.body, doc.body.childNodes.length);
  const prefix = codePointSlice(
    collapseWhitespace(before.toString(), false), -QUOTE_CONTEXT_CODE_POINTS,
  ).trimStart();
  const suffix = codePointSlice(
    collapseWhitespace(after.toString(), false), 0, QUOTE_CONTEXT_CODE_POINTS,
  ).trimEnd();
  const selector: Selector = { type: "TextQuoteSelector", exact };
  if (prefix) selector.prefix = prefix;
  if (suffix) selector.suffix = suffix;
  return selector;
}

/** Quote from a selection inside the single text node of a <pre>. */
function quoteFromPlainSelection(pre: HTMLElement, visible: string): Selector | null {
  const selection = document.getSelection();
  if (!selection || selection.isCollapsed || selection.rangeCount === 0) return null;
  const range = selection.getRangeAt(0);
  const node = pre.firstChild;
  if (!node || range.startContainer !== node || range.endContainer !== node) return null;
  // UTF-16 offsets -> code points
  const start = Array.from(visible.slice(0, range.startOffset)).length;
  const end = Array.from(visible.slice(0, range.endOffset)).length;
  if (start >= end) return null;
  const points = Array.from(visible);
  const selector: Selector = {
    type: "TextQuoteSelector",
    exact: points.slice(start, end).join(""),
  };
  const prefix = points.slice(Math.max(0, start - QUOTE_CONTEXT_CODE_POINTS), start).join("");
  const suffix = points.slice(end, end + QUOTE_CONTEXT_CODE_POINTS).join("");
  if (prefix) selector.prefix = prefix;
  if (suffix) selector.suffix = suffix;
  return selector;
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}
