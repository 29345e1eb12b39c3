/**
 * Client-side draft model and the JSON-LD document shapes the server
 * speaks. Everything here is pure so it can be unit-tested without a DOM;
 * the views only gather input and call these builders.
 */
export const ANNOTATION_CONTEXT = "http://www.w3.org/ns/anno.jsonld";
export const MEDIA_FRAGMENTS_IRI = "http://www.w3.org/TR/media-frags/";
export const EXTENSION_CONTEXT = {
    renarration: "urn:x-renarration:",
    transformation: "renarration:transformation",
    audience: "renarration:audience",
    languages: "renarration:languages",
    medium: "renarration:medium",
    literacyLevel: "renarration:literacyLevel",
};
/** Context characters kept on each side of a quote selection. */
export const QUOTE_CONTEXT_CODE_POINTS = 32;
/**
 * Collapse whitespace runs to single spaces the way the server's text
 * extraction does, so quotes built from a rendered page match the text
 * the anchor engine sees. This prepares input only; anchoring decisions
 * always come back from the server.
 */
export function collapseWhitespace(text, trim = true) {
    const collapsed = text.replace(/\s+/g, " ");
    return trim ? collapsed.trim() : collapsed;
}
/** Code-point-safe slice (negative start counts from the end). */
export function codePointSlice(text, start, end) {
    return Array.from(text).slice(start, end).join("");
}
/**
 * Build a TextQuoteSelector from a selection inside extracted text,
 * keeping QUOTE_CONTEXT_CODE_POINTS of context on each side. Offsets and
 * context lengths are in code points, not UTF-16 units.
 */
export function quoteSelectorFor(text, start, end) {
    const points = Array.from(text);
    if (!(0 <= start && start < end && end <= points.length)) {
        throw new RangeError(`selection (${start}, ${end}) out of range for ${points.length} points`);
    }
    const selector = {
        type: "TextQuoteSelector",
        exact: points.slice(start, end).join(""),
    };
    const prefix = points.slice(Math.max(0, start - QUOTE_CONTEXT_CODE_POINTS), start).join("");
    const suffix = points.slice(end, end + QUOTE_CONTEXT_CODE_POINTS).join("");
    if (prefix)
        selector.prefix = prefix;
    if (suffix)
        selector.suffix = suffix;
    return selector;
}
/**
 * Normalize a drag gesture (any corner order, rendered-pixel coordinates)
 * into an integer rectangle in natural-image space. Returns null for
 * degenerate drags that would have zero width or height.
 */
export function rectangleFromDrag(x1, y1, x2, y2, scale = 1) {
    const left = Math.round(Math.min(x1, x2) * scale);
    const top = Math.round(Math.min(y1, y2) * scale);
    const w = Math.round(Math.abs(x2 - x1) * scale);
    const h = Math.round(Math.abs(y2 - y1) * scale);
    if (w <= 0 || h <= 0)
        return null;
    return { x: Math.max(0, left), y: Math.max(0, top), w, h };
}
export function fragmentSelectorFor(rect) {
    return {
        type: "FragmentSelector",
        conformsTo: MEDIA_FRAGMENTS_IRI,
        value: `xywh=${rect.x},${rect.y},${rect.w},${rect.h}`,
    };
}
/** Field-level problems that block submission client-side. */
export function validateDraft(draft) {
    const problems = [];
    if (!draft.targetSource)
        problems.push("target: a source document is required");
    if (!draft.creatorName.trim())
        problems.push("creator: a name is required");
    const text = (draft.bodyText ?? "").trim();
    const iri = (draft.bodyIri ?? "").trim();
    if (!text && !iri)
        problems.push("body: enter text or link a resource");
    if (text && iri)
        problems.push("body: provide either text or a link, not both");
    if (iri && !/^[A-Za-z][A-Za-z0-9+.-]*:.+/.test(iri)) {
        problems.push("body: the link must be an absolute IRI");
    }
    if (draft.motivation === "renarrating" && !draft.transformation) {
        problems.push("transformation: required when contributing a renarration");
    }
    if (draft.motivation !== "renarrating" && draft.transformation) {
        problems.push("transformation: only applies to renarrations");
    }
    if (draft.literacyLevel !== undefined &&
        !(Number.isInteger(draft.literacyLevel) && draft.literacyLevel >= 1 && draft.literacyLevel <= 5)) {
        problems.push("literacyLevel: must be a whole number from 1 to 5");
    }
    return problems;
}
/** Assemble the JSON-LD document the server expects from a draft. */
export function buildAnnotationDocument(draft) {
    const problems = validateDraft(draft);
    if (problems.length) {
        throw new Error(`draft is not submittable: ${problems.join("; ")}`);
    }
    const usesExtension = draft.transformation !== undefined || draft.audienceLanguages !== undefined
        || draft.literacyLevel !== undefined;
    const doc = {
        "@context": usesExtension ? [ANNOTATION_CONTEXT, EXTENSION_CONTEXT] : ANNOTATION_CONTEXT,
        type: "Annotation",
        creator: { name: draft.creatorName.trim() },
        motivation: draft.motivation,
    };
    if (draft.transformation)
        doc.transformation = draft.transformation;
    if (draft.audienceLanguages !== undefined || draft.literacyLevel !== undefined) {
        doc.audience = { languages: draft.audienceLanguages ?? [] };
        if (draft.literacyLevel !== undefined)
            doc.audience.literacyLevel = draft.literacyLevel;
    }
    if (draft.bodyText?.trim()) {
        doc.body = draft.language
            ? { type: "TextualBody", value: draft.bodyText.trim(), language: draft.language }
            : { type: "TextualBody", value: draft.bodyText.trim() };
    }
    else {
        doc.body = draft.language
            ? { id: draft.bodyIri.trim(), language: draft.language }
            : { id: draft.bodyIri.trim() };
    }
    doc.target = draft.selector
        ? { source: draft.targetSource, selector: draft.selector }
        : { source: draft.targetSource };
    return doc;
}
/** Query-string parameters for the compose endpoint. */
export function composeQuery(target, audience) {
    const params = new URLSearchParams();
    params.set("target", target);
    params.set("lang", audience.languages.join(","));
    if (audience.medium)
        params.set("medium", audience.medium);
    if (audience.literacyLevel !== undefined)
        params.set("level", String(audience.literacyLevel));
    if (audience.fallback)
        params.set("fallback", audience.fallback);
    return params.toString();
}
/** The selector of a fetched annotation document, if it has one. */
export function selectorOf(doc) {
    const target = doc.target;
    if (!target || typeof target === "string")
        return null;
    return target.selector ?? null;
}
