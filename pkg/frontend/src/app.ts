// Panel wiring for the analysis UI. Layout mirrors the system's views:
// data attributes (expandable profiles), mark picker, encoding shelves,
// visualization canvas with a filter drop-zone, paginated record table,
// draggable provenance chips, free-form notes, and session controls.
// All provenance values on screen come from the server or its stream.

import { ApiClient, eventSourceSubscribe } from "./api.js";
import { DwellTracker } from "./dwell.js";
import { buildScene, sceneHasInk } from "./scene.js";
import type { SceneMark } from "./scene.js";
import { paintScene, rampColor } from "./render.js";
import { buildSpec, describeTransform, setSort, upsertFilter } from "./spec.js";
import type { ShelfState } from "./spec.js";
import { SessionController } from "./store.js";
import { CHANNELS } from "./types.js";
import type { AttributeInfo, BoundRow, Channel, MarkType, Metric } from "./types.js";

const API_BASE = (window as { PROVLENS_API?: string }).PROVLENS_API ?? "";
const PAGE_SIZE = 8;

const api = new ApiClient(API_BASE);
const controller = new SessionController(api, { subscribeStream: eventSourceSubscribe });
const store = controller.store;

const shelves: ShelfState = { mark: "point", encodings: {}, transforms: [] };
let recordRows: BoundRow[] = [];
let tablePage = 0;
let rebindTimer: ReturnType<typeof setTimeout> | null = null;

const tracker = new DwellTracker({
  thresholdMs: 250,
  onHover: (action) => controller.capture(action),
});

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function attributeInfos(): AttributeInfo[] {
  return store.session?.dataset?.attributes ?? [];
}

function fieldOptions(): { name: string; kind: string }[] {
  return [
    ...attributeInfos().map((a) => ({ name: a.name, kind: a.kind })),
    { name: "frequency", kind: "provenance" },
    { name: "recency", kind: "provenance" },
  ];
}

// --- session controls -------------------------------------------------------

function renderSessionBar(): void {
  const badge = $("mode-badge");
  badge.textContent = store.session ? store.session.mode : "no session";
  badge.className = `badge mode-${store.session?.mode ?? "none"}`;
  $("seq-label").textContent = store.session ? `seq ${store.session.seq}` : "";
}

async function startSession(mode: "edit" | "view" | "hybrid"): Promise<void> {
  await controller.createSession(mode);
  controller.startBatching();
  renderAll();
}

async function onDatasetChosen(input: HTMLInputElement): Promise<void> {
  const file = input.files?.[0];
  if (!file || !store.session) return;
  await controller.uploadDataset(await file.text(), file.name);
  controller.openStream(API_BASE);
  await rebind();
  renderAll();
}

async function onLogChosen(input: HTMLInputElement): Promise<void> {
  const file = input.files?.[0];
  if (!file || !store.session) return;
  const mode = (document.querySelector<HTMLSelectElement>("#import-mode") as HTMLSelectElement)
    .value as "view" | "hybrid";
  await controller.importLog(await file.text(), mode);
  if (controller.tracking) controller.openStream(API_BASE);
  await rebind();
  renderAll();
}

async function onExport(): Promise<void> {
  const text = await controller.exportLog();
  const blob = new Blob([text], { type: "application/x-ndjson" });
  const anchor = document.createElement("a");
  anchor.href = URL.createObjectURL(blob);
  anchor.download = `${store.session?.session_id ?? "session"}.jsonl`;
  anchor.click();
  URL.revokeObjectURL(anchor.href);
}

async function onStrategyChange(select: HTMLSelectElement): Promise<void> {
  await controller.refreshScores(select.value || undefined);
  renderAll();
}

// --- attribute panel ---------------------------------------------------------

const expanded = new Set<string>();

function provenanceGlyph(frequency: number, recency: number): string {
  const width = 64;
  const bar = Math.max(1, frequency * width);
  const cx = 3 + recency * (width - 6);
  return (
    `<svg class="glyph" width="${width}" height="14">` +
    `<rect x="0" y="3" width="${bar}" height="8" fill="${rampColor(frequency)}"></rect>` +
    `<circle cx="${cx}" cy="7" r="3" fill="#b2552e" opacity="${recency > 0 ? 1 : 0.25}"></circle>` +
    `</svg>`
  );
}

function profileSvg(profile: { kind: string; bin_pcts?: number[]; categories?: Record<string, number> }): string {
  const width = 180;
  const height = 48;
  if (profile.kind === "numerical" && profile.bin_pcts && profile.bin_pcts.length > 0) {
    const max = Math.max(...profile.bin_pcts, 1);
    const step = width / profile.bin_pcts.length;
    const points = profile.bin_pcts
      .map((p, i) => `${step * (i + 0.5)},${height - (p / max) * (height - 6)}`)
      .join(" ");
    return (
      `<svg width="${width}" height="${height}">` +
      `<polygon points="0,${height} ${points} ${width},${height}" fill="#aecbe4" stroke="#5b8db8"></polygon>` +
      `</svg>`
    );
  }
  const categories = Object.entries(profile.categories ?? {});
  const max = Math.max(...categories.map(([, p]) => p), 1);
  const step = width / Math.max(categories.length, 1);
  const bars = categories
    .map(([name, p], i) => {
      const h = (p / max) * (height - 14);
      return (
        `<rect x="${i * step + 2}" y="${height - 12 - h}" width="${step - 4}" height="${h}" fill="#5b8db8">` +
        `<title>${name}: ${p.toFixed(1)}%</title></rect>`
      );
    })
    .join("");
  return `<svg width="${width}" height="${height}">${bars}</svg>`;
}

function renderAttributes(): void {
  const host = $("attribute-list");
  host.innerHTML = "";
  for (const attr of attributeInfos()) {
    const row = document.createElement("div");
    row.className = "attr-row";
    const glyph = store.glyph("attributes", attr.name);

    const chip = document.createElement("span");
    chip.className = `chip kind-${attr.kind}`;
    chip.textContent = attr.name;
    chip.draggable = true;
    chip.title = attr.description ?? attr.name;
    chip.addEventListener("dragstart", (e) => e.dataTransfer?.setData("text/field", attr.name));
    row.appendChild(chip);

    const glyphHost = document.createElement("span");
    glyphHost.innerHTML = provenanceGlyph(glyph.frequency, glyph.recency);
    glyphHost.title = `frequency ${glyph.frequency.toFixed(2)}, recency ${glyph.recency.toFixed(2)}`;
    row.appendChild(glyphHost);

    const expand = document.createElement("button");
    expand.textContent = expanded.has(attr.name) ? "−" : "+";
    expand.className = "mini";
    expand.addEventListener("click", () => void toggleProfile(attr.name));
    row.appendChild(expand);

    host.appendChild(row);
    if (expanded.has(attr.name)) {
      const detail = document.createElement("div");
      detail.className = "attr-detail";
      detail.id = `profile-${attr.name}`;
      detail.textContent = "loading profile…";
      host.appendChild(detail);
      void fillProfile(attr.name, detail);
    }
  }
}

async function toggleProfile(name: string): Promise<void> {
  if (expanded.has(name)) {
    expanded.delete(name);
  } else {
    expanded.add(name);
    controller.captureInspect(name); // opening the distribution is an interaction
  }
  renderAttributes();
}

async function fillProfile(name: string, host: HTMLElement): Promise<void> {
  if (!store.session) return;
  const profile = await api.getProfile(store.session.session_id, name);
  host.innerHTML = profileSvg(profile);
  const caption = document.createElement("div");
  caption.className = "muted";
  caption.textContent =
    profile.kind === "numerical"
      ? `quartile bins: ${(profile.bin_pcts ?? []).map((p) => p.toFixed(0) + "%").join(" · ")} (null ${profile.null_pct.toFixed(0)}%)`
      : `${Object.keys(profile.categories ?? {}).length} categories (null ${profile.null_pct.toFixed(0)}%)`;
  host.appendChild(caption);
}

function renderAttributeSort(): void {
  const select = $("attr-sort") as HTMLSelectElement;
  select.onchange = () => {
    if (!select.value) return;
    shelves.transforms = setSort(shelves.transforms, select.value, "desc");
    controller.captureSortCommit(select.value);
    void rebind();
  };
}

// --- mark + encoding shelves --------------------------------------------------

function renderMarkPicker(): void {
  const select = $("mark-select") as HTMLSelectElement;
  select.value = shelves.mark;
  select.onchange = () => {
    shelves.mark = select.value as MarkType;
    void rebind();
  };
}

function renderShelves(): void {
  const host = $("shelf-list");
  host.innerHTML = "";
  for (const channel of CHANNELS) {
    const row = document.createElement("div");
    row.className = "shelf";
    const label = document.createElement("span");
    label.className = "shelf-label";
    label.textContent = channel;
    row.appendChild(label);

    const select = document.createElement("select");
    select.appendChild(new Option("—", ""));
    for (const field of fieldOptions()) {
      select.appendChild(new Option(field.name, field.name));
    }
    select.value = shelves.encodings[channel]?.field ?? "";
    select.onchange = () => assignField(channel, select.value || null);
    row.appendChild(select);

    const binding = shelves.encodings[channel];
    if (binding) {
      const reverse = document.createElement("button");
      reverse.className = `mini ${binding.reverse ? "on" : ""}`;
      reverse.title = "reverse the encoding scale";
      reverse.textContent = "⇄";
      reverse.onclick = () => {
        binding.reverse = !binding.reverse;
        void rebind();
      };
      row.appendChild(reverse);

      if (channel === "y" || channel === "x") {
        const agg = document.createElement("select");
        for (const op of ["", "sum", "mean", "count"]) {
          agg.appendChild(new Option(op || "raw", op));
        }
        agg.value = binding.aggregate ?? "";
        agg.onchange = () => {
          binding.aggregate = (agg.value || undefined) as "sum" | "mean" | "count" | undefined;
          void rebind();
        };
        row.appendChild(agg);
      }
    }

    row.addEventListener("dragover", (e) => e.preventDefault());
    row.addEventListener("drop", (e) => {
      e.preventDefault();
      const field = e.dataTransfer?.getData("text/field");
      if (field) assignField(channel, field);
    });
    host.appendChild(row);
  }
}

function assignField(channel: Channel, field: string | null): void {
  if (field === null) {
    delete shelves.encodings[channel];
  } else {
    shelves.encodings[channel] = { field };
    // Encode assignments are tracked interactions (the server ignores
    // provenance-field targets on its own).
    controller.captureEncodeAssign(field);
  }
  renderShelves();
  void rebind();
}

// --- filter drop zone ----------------------------------------------------------

interface ActiveFilter {
  field: string;
  kind: string;
}

const activeFilters: ActiveFilter[] = [];

function renderFilterZone(): void {
  const zone = $("filter-zone");
  zone.innerHTML = activeFilters.length ? "" : "<span class='muted'>drop a field to filter</span>";
  zone.ondragover = (e) => e.preventDefault();
  zone.ondrop = (e) => {
    e.preventDefault();
    const field = e.dataTransfer?.getData("text/field");
    if (!field) return;
    const kind =
      field === "frequency" || field === "recency"
        ? "provenance"
        : attributeInfos().find((a) => a.name === field)?.kind ?? "categorical";
    if (!activeFilters.some((f) => f.field === field)) {
      activeFilters.push({ field, kind });
    }
    renderFilterZone();
  };
  for (const filter of activeFilters) {
    zone.appendChild(filterControl(filter));
  }
  const summary = document.createElement("div");
  summary.className = "muted";
  summary.textContent = shelves.transforms.map(describeTransform).join(" | ");
  zone.appendChild(summary);
}

function filterControl(filter: ActiveFilter): HTMLElement {
  const box = document.createElement("div");
  box.className = "filter-box";
  const title = document.createElement("strong");
  title.textContent = filter.field;
  box.appendChild(title);

  if (filter.kind === "categorical") {
    const select = document.createElement("select");
    select.multiple = true;
    const seen = new Set<string>();
    for (const row of recordRows) {
      const v = row[filter.field];
      if (v !== null && v !== undefined) seen.add(String(v));
    }
    for (const v of [...seen].sort()) select.appendChild(new Option(v, v));
    select.onchange = () => {
      const values = [...select.selectedOptions].map((o) => o.value);
      shelves.transforms = upsertFilter(shelves.transforms, {
        kind: "filter",
        metric: filter.field,
        values,
      });
      controller.captureFilterCommit(filter.field);
      void rebind();
    };
    box.appendChild(select);
    return box;
  }

  // Numerical or provenance: committed range slider pair.
  const provenance = filter.kind === "provenance";
  const values = provenance
    ? [0, 1]
    : recordRows
        .map((r) => r[filter.field])
        .filter((v): v is number => typeof v === "number");
  const lo = provenance ? 0 : Math.min(...values, 0);
  const hi = provenance ? 1 : Math.max(...values, 1);
  const low = document.createElement("input");
  const high = document.createElement("input");
  for (const [input, value] of [
    [low, lo],
    [high, hi],
  ] as const) {
    input.type = "range";
    input.min = String(lo);
    input.max = String(hi);
    input.step = provenance ? "0.05" : "any";
    input.value = String(value);
  }
  const commit = () => {
    const range: [number, number] = [Number(low.value), Number(high.value)];
    if (range[0] > range[1]) range.reverse();
    shelves.transforms = upsertFilter(shelves.transforms, {
      kind: "filter",
      metric: filter.field,
      range,
    });
    controller.captureFilterCommit(filter.field); // logged once, on commit
    void rebind();
  };
  low.onchange = commit;
  high.onchange = commit;
  box.appendChild(low);
  box.appendChild(high);
  return box;
}

// --- canvas + record table -------------------------------------------------------

function markHoverTarget(mark: SceneMark): void {
  const groupField = aggregateGroupField();
  if (groupField) {
    tracker.enter({ kind: "record-hover", group: [groupField, mark.entity], aggregate: true });
    const constituents = recordRows
      .filter((r) => String(r[groupField]) === mark.entity)
      .map((r) => String(r.id));
    store.setTableFocus(constituents);
  } else {
    tracker.enter({ kind: "record-hover", record: mark.entity });
    store.setTableFocus([mark.entity]);
  }
}

function aggregateGroupField(): string | null {
  const hasAggregate = Object.values(shelves.encodings).some((b) => b?.aggregate);
  if (!hasAggregate) return null;
  for (const binding of Object.values(shelves.encodings)) {
    if (!binding || binding.aggregate) continue;
    const info = attributeInfos().find((a) => a.name === binding.field);
    if (info?.kind === "categorical") return binding.field;
  }
  return null;
}

function renderCanvas(): void {
  const svg = $("canvas") as unknown as SVGSVGElement;
  const bound = store.bound;
  if (!bound) {
    svg.innerHTML = "";
    return;
  }
  const scene = buildScene(bound.spec, bound.rows);
  paintScene(svg, scene, {
    onMarkEnter: (mark) => markHoverTarget(mark),
    onMarkLeave: () => {
      tracker.leave();
      store.setTableFocus(null);
    },
  });
  $("canvas-status").textContent = sceneHasInk(scene)
    ? `${bound.rows.length} marks`
    : `${bound.rows.length} marks (no provenance ink yet)`;
}

function renderTable(): void {
  const host = $("record-table");
  host.innerHTML = "";
  const names = attributeInfos().map((a) => a.name);
  if (names.length === 0) return;

  let rows = recordRows;
  if (store.tableFocus) {
    rows = rows.filter((r) => store.tableFocus?.includes(String(r.id)));
  }
  const pages = Math.max(1, Math.ceil(rows.length / PAGE_SIZE));
  tablePage = Math.min(tablePage, pages - 1);
  const visible = rows.slice(tablePage * PAGE_SIZE, (tablePage + 1) * PAGE_SIZE);

  const table = document.createElement("table");
  const head = table.insertRow();
  for (const column of ["id", ...names, "frequency", "recency"]) {
    const cell = document.createElement("th");
    cell.textContent = column;
    head.appendChild(cell);
  }
  for (const row of visible) {
    const tr = table.insertRow();
    tr.addEventListener("pointerenter", () =>
      tracker.enter({ kind: "table-row-hover", record: String(row.id) }),
    );
    tr.addEventListener("pointerleave", () => tracker.leave());
    for (const column of ["id", ...names]) {
      tr.insertCell().textContent = row[column] === null ? "" : String(row[column]);
    }
    const glyph = store.glyph("records", String(row.id));
    for (const metric of ["frequency", "recency"] as Metric[]) {
      const cell = tr.insertCell();
      cell.textContent = glyph[metric].toFixed(2);
      cell.style.background = rampColor(glyph[metric]);
      cell.className = "score-cell";
    }
  }
  host.appendChild(table);

  const pager = document.createElement("div");
  pager.className = "pager";
  const prev = document.createElement("button");
  prev.textContent = "‹";
  prev.disabled = tablePage === 0;
  prev.onclick = () => {
    tablePage -= 1;
    renderTable();
  };
  const next = document.createElement("button");
  next.textContent = "›";
  next.disabled = tablePage >= pages - 1;
  next.onclick = () => {
    tablePage += 1;
    renderTable();
  };
  const label = document.createElement("span");
  label.textContent = ` ${tablePage + 1}/${pages} `;
  pager.append(prev, label, next);
  host.appendChild(pager);
}

// --- provenance chips -----------------------------------------------------------

function renderProvenanceChips(): void {
  const host = $("provenance-chips");
  host.innerHTML = "";
  for (const field of ["frequency", "recency"]) {
    const chip = document.createElement("span");
    chip.className = "chip kind-provenance";
    chip.textContent = field;
    chip.draggable = true;
    chip.addEventListener("dragstart", (e) => e.dataTransfer?.setData("text/field", field));
    host.appendChild(chip);
  }
}

// --- binding ---------------------------------------------------------------------

async function rebind(): Promise<void> {
  if (!store.session?.dataset) return;
  await controller.flush();
  const spec = buildSpec(shelves, "records");
  if (Object.keys(spec.encodings).length === 0) {
    spec.encodings = { x: { field: "recency" }, y: { field: "frequency" } };
  }
  await controller.bindSpec(spec);

  // Parallel un-aggregated fetch backs the record table and filter controls.
  const tableSpec = buildSpec(
    { ...shelves, encodings: {}, transforms: shelves.transforms.filter((t) => t.kind !== "topn") },
    "records",
  );
  tableSpec.encodings = { x: { field: "recency" } };
  const bound = await api.bindSpec(store.session.session_id, tableSpec);
  recordRows = bound.rows;
  renderAll();
}

function scheduleRebind(): void {
  if (rebindTimer !== null) clearTimeout(rebindTimer);
  rebindTimer = setTimeout(() => {
    rebindTimer = null;
    void rebind();
  }, 400);
}

// --- top-level -------------------------------------------------------------------

function renderAll(): void {
  renderSessionBar();
  renderAttributes();
  renderMarkPicker();
  renderShelves();
  renderFilterZone();
  renderCanvas();
  renderTable();
  renderProvenanceChips();
}

export function boot(): void {
  $("start-edit").onclick = () => void startSession("edit");
  $("start-view").onclick = () => void startSession("view");
  $("start-hybrid").onclick = () => void startSession("hybrid");
  ($("dataset-input") as HTMLInputElement).onchange = (e) =>
    void onDatasetChosen(e.target as HTMLInputElement);
  ($("log-input") as HTMLInputElement).onchange = (e) => void onLogChosen(e.target as HTMLInputElement);
  $("export-btn").onclick = () => void onExport();
  ($("strategy-select") as HTMLSelectElement).onchange = (e) =>
    void onStrategyChange(e.target as HTMLSelectElement);
  renderAttributeSort();

  // Stream deltas patch glyphs and provenance columns without a reload;
  // aggregated canvases re-bind lazily since group sums change server-side.
  store.subscribe(() => {
    renderSessionBar();
    renderAttributes();
    renderTable();
    if (aggregateGroupField()) scheduleRebind();
    else renderCanvas();
  });

  setInterval(() => tracker.flush(), 120);
  renderAll();
}

boot();
