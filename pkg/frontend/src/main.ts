// Dashboard bootstrap and DOM wiring. All physics/planning numbers come
// from the service; this file only projects, formats, and reacts.

import { fetchNetwork, streamTelemetry, submitDelivery } from "./api.js";
import { makeProjector, networkBounds, type Projector } from "./map.js";
import {
  applyDisconnect,
  applyFrame,
  applyStatus,
  batteryPercent,
  canDispatch,
  formatClock,
  initialPanel,
  isTerminal,
  phaseLabel,
  routeNodeSequence,
  type PanelState,
} from "./model.js";
import type { DeliveryRecord, NetworkDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const MAP_W = 720;
const MAP_H = 560;
const ROUTE_COLORS = ["#e4572e", "#17bebb", "#ffc914", "#76b041", "#b96ac9"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

interface MapView {
  svg: SVGSVGElement;
  project: Projector;
  overlay: SVGGElement;
}

function renderMap(doc: NetworkDoc, container: HTMLElement): MapView {
  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${MAP_W} ${MAP_H}`);
  svg.setAttribute("class", "map");
  const project = makeProjector(networkBounds(doc), MAP_W, MAP_H);

  const zoneLayer = svgEl("g", { class: "zones" });
  for (const zone of doc.zones) {
    const points = zone.region
      .map(([x, y]) => project(x, y).join(","))
      .join(" ");
    const poly = svgEl("polygon", { points, class: "zone" });
    poly.appendChild(svgEl("title", {}));
    poly.querySelector("title")!.textContent = `no-fly zone ${zone.id}`;
    zoneLayer.appendChild(poly);
  }
  svg.appendChild(zoneLayer);

  const byId = new Map(doc.nodes.map((n) => [n.id, n]));
  const edgeLayer = svgEl("g", { class: "edges" });
  for (const edge of doc.edges) {
    const a = byId.get(edge.from)!;
    const b = byId.get(edge.to)!;
    const [x1, y1] = project(a.position[0], a.position[1]);
    const [x2, y2] = project(b.position[0], b.position[1]);
    edgeLayer.appendChild(
      svgEl("line", {
        x1: String(x1),
        y1: String(y1),
        x2: String(x2),
        y2: String(y2),
        class: "edge",
      }),
    );
  }
  svg.appendChild(edgeLayer);

  const nodeLayer = svgEl("g", { class: "nodes" });
  for (const node of doc.nodes) {
    const [cx, cy] = project(node.position[0], node.position[1]);
    const dot = svgEl("circle", {
      cx: String(cx),
      cy: String(cy),
      r: node.is_recharge ? "6" : "4.5",
      class: node.is_recharge ? "node recharge" : "node",
    });
    const title = svgEl("title", {});
    title.textContent = `${node.id} @ ${node.position[2].toFixed(1)} m${
      node.is_recharge ? " (recharge)" : ""
    }`;
    dot.appendChild(title);
    nodeLayer.appendChild(dot);
  }
  svg.appendChild(nodeLayer);

  const overlay = svgEl("g", { class: "overlay" }) as SVGGElement;
  svg.appendChild(overlay);
  container.appendChild(svg);
  return { svg, project, overlay };
}

interface PanelView {
  state: PanelState;
  root: HTMLElement;
  phaseEl: HTMLElement;
  clockEl: HTMLElement;
  gaugeFill: HTMLElement;
  gaugeText: HTMLElement;
  marker: SVGElement;
  polyline: SVGElement;
}

function makePanel(
  record: DeliveryRecord,
  doc: NetworkDoc,
  view: MapView,
  color: string,
  onClose: (panel: PanelView) => void,
): PanelView {
  const route = record.route!;
  const byId = new Map(doc.nodes.map((n) => [n.id, n]));
  const points = routeNodeSequence(route)
    .map((id) => byId.get(id)!)
    .map((n) => view.project(n.position[0], n.position[1]).join(","))
    .join(" ");
  const polyline = svgEl("polyline", {
    points,
    class: "route",
    stroke: color,
  });
  view.overlay.appendChild(polyline);
  const src = byId.get(route.src)!;
  const [mx, my] = view.project(src.position[0], src.position[1]);
  const marker = svgEl("circle", {
    cx: String(mx),
    cy: String(my),
    r: "7",
    class: "drone",
    fill: color,
  });
  view.overlay.appendChild(marker);

  const root = el("section", "panel");
  root.style.borderColor = color;
  const header = el("header");
  header.appendChild(el("strong", "", `${route.src} → ${route.dst}`));
  header.appendChild(
    el("span", "muted", ` #${record.id.slice(0, 8)} · eta ${formatClock(route.total_time_s)}`),
  );
  const close = el("button", "close", "×");
  header.appendChild(close);
  root.appendChild(header);

  const phaseEl = el("div", "phase", "connecting…");
  root.appendChild(phaseEl);
  const clockEl = el("div", "clock", formatClock(0));
  root.appendChild(clockEl);

  const gauge = el("div", "gauge");
  const gaugeFill = el("div", "gauge-fill");
  gauge.appendChild(gaugeFill);
  const gaugeText = el("span", "gauge-text", "");
  gauge.appendChild(gaugeText);
  root.appendChild(gauge);

  const panel: PanelView = {
    state: initialPanel(record.id, route.src, route.dst),
    root,
    phaseEl,
    clockEl,
    gaugeFill,
    gaugeText,
    marker,
    polyline,
  };
  close.addEventListener("click", () => onClose(panel));
  return panel;
}

function renderPanel(panel: PanelView, view: MapView): void {
  const { state } = panel;
  panel.phaseEl.textContent = phaseLabel(state);
  panel.root.classList.toggle("done", state.phase === "delivered");
  panel.root.classList.toggle("failed", state.phase === "failed");
  if (state.latest) {
    panel.clockEl.textContent = formatClock(state.latest.clock);
    const pct = batteryPercent(state.latest.battery_fraction);
    panel.gaugeFill.style.width = `${pct}%`;
    panel.gaugeFill.classList.toggle("low", pct < 20);
    panel.gaugeText.textContent = `${pct.toFixed(1)}% · ${state.latest.battery.toFixed(2)} Wh`;
    const [x, y] = view.project(state.latest.position[0], state.latest.position[1]);
    panel.marker.setAttribute("cx", String(x));
    panel.marker.setAttribute("cy", String(y));
  }
}

async function boot(): Promise<void> {
  const app = document.getElementById("app")!;
  const banner = el("div", "banner hidden");
  app.appendChild(banner);

  let doc: NetworkDoc;
  try {
    doc = await fetchNetwork("");
  } catch {
    banner.textContent = "service unreachable — retrying in 3 s";
    banner.classList.remove("hidden");
    setTimeout(boot, 3000);
    return;
  }
  banner.classList.add("hidden");
  app.textContent = "";

  const layout = el("div", "layout");
  const mapBox = el("div", "map-box");
  const side = el("div", "side");
  layout.appendChild(mapBox);
  layout.appendChild(side);
  app.appendChild(layout);

  const view = renderMap(doc, mapBox);

  const form = el("form", "dispatch");
  const srcSelect = el("select") as HTMLSelectElement;
  const dstSelect = el("select") as HTMLSelectElement;
  const ids = doc.nodes.map((n) => n.id).sort();
  for (const select of [srcSelect, dstSelect]) {
    for (const id of ids) {
      const option = el("option", "", id) as HTMLOptionElement;
      option.value = id;
      select.appendChild(option);
    }
  }
  dstSelect.selectedIndex = Math.min(1, ids.length - 1);
  const fraction = el("input") as HTMLInputElement;
  fraction.type = "number";
  fraction.min = "0.05";
  fraction.max = "1";
  fraction.step = "0.05";
  fraction.value = "1";
  const button = el("button", "", "dispatch") as HTMLButtonElement;
  button.type = "submit";
  const formError = el("div", "form-error", "");

  form.appendChild(el("label", "", "from"));
  form.appendChild(srcSelect);
  form.appendChild(el("label", "", "to"));
  form.appendChild(dstSelect);
  form.appendChild(el("label", "", "battery"));
  form.appendChild(fraction);
  form.appendChild(button);
  form.appendChild(formError);
  side.appendChild(form);

  const panels = el("div", "panels");
  side.appendChild(panels);

  function refreshDispatchable(): void {
    const check = canDispatch(srcSelect.value, dstSelect.value);
    button.disabled = !check.ok;
    formError.textContent = check.ok ? "" : check.reason ?? "";
  }
  srcSelect.addEventListener("change", refreshDispatchable);
  dstSelect.addEventListener("change", refreshDispatchable);
  refreshDispatchable();

  let colorIndex = 0;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    formError.textContent = "";
    const result = await submitDelivery(
      "",
      srcSelect.value,
      dstSelect.value,
      Number(fraction.value),
    );
    if (!result.ok) {
      formError.textContent = `${result.error}: ${result.detail}`;
      return;
    }
    const record = result.record;
    if (record.status === "failed" || record.route === null) {
      formError.textContent = `cannot deliver: ${record.reason ?? "failed"}`;
      return;
    }
    const color = ROUTE_COLORS[colorIndex++ % ROUTE_COLORS.length];
    const panel = makePanel(record, doc, view, color, (p) => {
      subscription.close();
      p.root.remove();
      p.marker.remove();
      p.polyline.remove();
    });
    panels.prepend(panel.root);
    renderPanel(panel, view);
    const subscription = streamTelemetry("", record.id, {
      onFrame(frame) {
        panel.state = applyFrame(panel.state, frame);
        renderPanel(panel, view);
      },
      onStatus(status) {
        panel.state = applyStatus(panel.state, status);
        renderPanel(panel, view);
        if (isTerminal(panel.state) && status.status === "delivered") {
          const dst = doc.nodes.find((n) => n.id === panel.state.dst)!;
          const [x, y] = view.project(dst.position[0], dst.position[1]);
          panel.marker.setAttribute("cx", String(x));
          panel.marker.setAttribute("cy", String(y));
        }
      },
      onDrop() {
        panel.state = applyDisconnect(panel.state);
        renderPanel(panel, view);
      },
    });
  });
}

boot();
