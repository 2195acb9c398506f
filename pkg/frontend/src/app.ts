// DOM wiring. All behavior worth testing lives in the other modules; this
// file only binds them to form controls, the drawing canvas, and the map
// panel, so it stays out of the unit suite.

import { GatewayClient, GatewayError } from './api.js';
import {
  compositeOverlay,
  formatArea,
  maskOverlay,
  seriesSvg,
  seriesView,
} from './chart.js';
import { AnalysisLoop } from './loop.js';
import {
  Action,
  ConsoleState,
  buildRequest,
  canAnalyze,
  initialState,
  localViolations,
  reduce,
} from './state.js';
import { decodeTiff } from './tiff.js';
import { AnalysisOutcome } from './types.js';
import { Draft, dateBounds, findSensor, isoToday } from './validation.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

// The drawing canvas maps clicks onto this world window (same CRS as the
// bundled demo scenes); pan/zoom is out of scope.
const DRAW_EXTENT = { minx: 499900, miny: 2599600, maxx: 500400, maxy: 2600100 };
const DRAW_CRS = 'EPSG:32646';

function gatewayBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('gateway');
  return fromQuery ?? window.location.origin;
}

export function mount(): void {
  const client = new GatewayClient(gatewayBase());
  let state: ConsoleState = initialState(isoToday());

  const sensorSelect = $<HTMLSelectElement>('sensor');
  const startInput = $<HTMLInputElement>('start');
  const endInput = $<HTMLInputElement>('end');
  const minSlider = $<HTMLInputElement>('ndvi-min');
  const maxSlider = $<HTMLInputElement>('ndvi-max');
  const minLabel = $<HTMLElement>('ndvi-min-value');
  const maxLabel = $<HTMLElement>('ndvi-max-value');
  const cloudInput = $<HTMLInputElement>('cloud');
  const analyzeButton = $<HTMLButtonElement>('analyze');
  const problems = $<HTMLUListElement>('problems');
  const readout = $<HTMLElement>('readout');
  const status = $<HTMLElement>('status');
  const chartHost = $<HTMLElement>('chart');
  const canvas = $<HTMLCanvasElement>('map');
  const drawButton = $<HTMLButtonElement>('draw');
  const closeButton = $<HTMLButtonElement>('close-ring');
  const drawNote = $<HTMLElement>('draw-note');
  const datasetSelect = $<HTMLSelectElement>('dataset');
  const unitSelects = [
    $<HTMLSelectElement>('unit-0'),
    $<HTMLSelectElement>('unit-1'),
    $<HTMLSelectElement>('unit-2'),
  ];

  interface MapLayer {
    image: ImageData;
    extent: [number, number, number, number];
  }

  const ctx = canvas.getContext('2d');
  let overlay: MapLayer | null = null;
  let highlight: MapLayer | null = null;

  const toWorld = (px: number, py: number): [number, number] => {
    const fx = px / canvas.width;
    const fy = py / canvas.height;
    return [
      DRAW_EXTENT.minx + fx * (DRAW_EXTENT.maxx - DRAW_EXTENT.minx),
      DRAW_EXTENT.maxy - fy * (DRAW_EXTENT.maxy - DRAW_EXTENT.miny),
    ];
  };

  const toCanvas = (x: number, y: number): [number, number] => [
    ((x - DRAW_EXTENT.minx) / (DRAW_EXTENT.maxx - DRAW_EXTENT.minx)) * canvas.width,
    ((DRAW_EXTENT.maxy - y) / (DRAW_EXTENT.maxy - DRAW_EXTENT.miny)) * canvas.height,
  ];

  function drawBasemap(): void {
    if (!ctx) {
      return;
    }
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = '#eef3ee';
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = '#cddcd0';
    for (let gx = DRAW_EXTENT.minx; gx <= DRAW_EXTENT.maxx; gx += 100) {
      const [cx] = toCanvas(gx, DRAW_EXTENT.miny);
      ctx.beginPath();
      ctx.moveTo(cx, 0);
      ctx.lineTo(cx, canvas.height);
      ctx.stroke();
    }
    for (let gy = DRAW_EXTENT.miny; gy <= DRAW_EXTENT.maxy; gy += 100) {
      const [, cy] = toCanvas(DRAW_EXTENT.minx, gy);
      ctx.beginPath();
      ctx.moveTo(0, cy);
      ctx.lineTo(canvas.width, cy);
      ctx.stroke();
    }
  }

  function paintOverlay(layer: MapLayer | null): void {
    if (!ctx || !layer) {
      return;
    }
    const [minx, miny, maxx, maxy] = layer.extent;
    const [left, top] = toCanvas(minx, maxy);
    const [right, bottom] = toCanvas(maxx, miny);
    const scratch = document.createElement('canvas');
    scratch.width = layer.image.width;
    scratch.height = layer.image.height;
    scratch.getContext('2d')?.putImageData(layer.image, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(scratch, left, top, right - left, bottom - top);
  }

  function paintMap(): void {
    if (!ctx) {
      return;
    }
    drawBasemap();
    paintOverlay(overlay);
    paintOverlay(highlight);

    ctx.strokeStyle = '#c62828';
    ctx.fillStyle = '#c62828';
    const ring =
      state.drawing ??
      (state.roi?.kind === 'polygon' ? state.roi.vertices : null);
    if (ring) {
      ctx.beginPath();
      ring.forEach(([x, y], i) => {
        const [cx, cy] = toCanvas(x, y);
        if (i === 0) {
          ctx.moveTo(cx, cy);
        } else {
          ctx.lineTo(cx, cy);
        }
      });
      if (state.drawing === null) {
        ctx.closePath();
      }
      ctx.stroke();
      ring.forEach(([x, y]) => {
        const [cx, cy] = toCanvas(x, y);
        ctx.fillRect(cx - 2, cy - 2, 4, 4);
      });
    }
  }

  async function loadOverlays(result: AnalysisOutcome): Promise<void> {
    if (result.outcome !== 'ok') {
      overlay = null;
      highlight = null;
      paintMap();
      return;
    }
    try {
      const [compositeBytes, maskBytes] = await Promise.all([
        client.fetchExport(result.analysis_id, 'composite'),
        client.fetchExport(result.analysis_id, 'mask'),
      ]);
      const composite = decodeTiff(compositeBytes);
      const mask = decodeTiff(maskBytes);
      const extent = (d: typeof composite): [number, number, number, number] => [
        d.originX,
        d.originY + d.height * d.pixelHeight,
        d.originX + d.width * d.pixelWidth,
        d.originY,
      ];
      const base = compositeOverlay(composite);
      const top = maskOverlay(mask);
      overlay = {
        image: new ImageData(base.rgba, base.width, base.height),
        extent: extent(composite),
      };
      highlight = {
        image: new ImageData(top.rgba, top.width, top.height),
        extent: extent(mask),
      };
    } catch {
      overlay = null;
      highlight = null;
    }
    paintMap();
  }

  const loop = new AnalysisLoop(client, {
    onInFlight: () => {
      status.textContent = 'analyzing…';
    },
    onResult: (result, hash) => {
      dispatch({ type: 'analyze_succeeded', hash, result });
      if (result.outcome === 'ok') {
        readout.textContent = `${formatArea(result.area.area_km2)} · ${
          result.area.pixel_count
        } pixels`;
        status.textContent = '';
        chartHost.innerHTML = seriesSvg(seriesView(result.series));
      } else {
        readout.textContent = '—';
        status.textContent = result.message;
        chartHost.innerHTML = seriesSvg(seriesView([]));
      }
      void loadOverlays(result);
    },
    onError: (error, hash) => {
      if (error instanceof GatewayError && error.body.report) {
        dispatch({
          type: 'analyze_rejected',
          hash,
          violations: error.body.report.violations,
        });
      } else {
        dispatch({ type: 'analyze_rejected', hash, violations: [] });
        status.textContent = String(error);
      }
    },
  });

  function render(): void {
    if (state.registry) {
      if (sensorSelect.options.length <= 1) {
        for (const sensor of state.registry) {
          const option = document.createElement('option');
          option.value = sensor.sensor_id;
          option.textContent = sensor.sensor_id;
          sensorSelect.appendChild(option);
        }
      }
      const sensor = findSensor(state.registry, state.draft.sensor_id);
      if (sensor) {
        const bounds = dateBounds(sensor, state.today);
        startInput.min = bounds.min;
        startInput.max = bounds.max;
        endInput.min = bounds.min;
        endInput.max = bounds.max;
      }
    }
    minLabel.textContent = state.draft.ndvi_min.toFixed(2);
    maxLabel.textContent = state.draft.ndvi_max.toFixed(2);

    const violations = state.serverReport ?? localViolations(state);
    problems.innerHTML = '';
    for (const violation of violations) {
      const item = document.createElement('li');
      item.textContent = `${violation.field}: ${violation.message}`;
      problems.appendChild(item);
    }
    for (const el of [startInput, endInput, minSlider, maxSlider, cloudInput]) {
      el.classList.remove('invalid');
    }
    const flagged = new Set(violations.map((v) => v.field));
    if (flagged.has('start_date')) startInput.classList.add('invalid');
    if (flagged.has('end_date')) endInput.classList.add('invalid');
    if (flagged.has('ndvi_min')) minSlider.classList.add('invalid');
    if (flagged.has('ndvi_max')) maxSlider.classList.add('invalid');
    if (flagged.has('max_cloud_pct')) cloudInput.classList.add('invalid');

    analyzeButton.disabled = !canAnalyze(state) || state.busy;
    drawNote.textContent =
      state.drawError ??
      (state.drawing !== null ? `${state.drawing.length} corner(s)` : '');
    closeButton.disabled = state.drawing === null;
    paintMap();
  }

  function dispatch(action: Action): void {
    state = reduce(state, action);
    render();
  }

  function submit(): void {
    const body = buildRequest(state);
    if (!body) {
      return;
    }
    const hash = loop.change(body);
    dispatch({ type: 'analyze_started', hash });
  }

  sensorSelect.addEventListener('change', () => {
    dispatch({ type: 'field_edited', field: 'sensor_id', value: sensorSelect.value });
  });
  startInput.addEventListener('change', () => {
    dispatch({ type: 'field_edited', field: 'start_date', value: startInput.value });
  });
  endInput.addEventListener('change', () => {
    dispatch({ type: 'field_edited', field: 'end_date', value: endInput.value });
  });
  cloudInput.addEventListener('change', () => {
    dispatch({
      type: 'field_edited',
      field: 'max_cloud_pct',
      value: Number(cloudInput.value),
    });
  });
  for (const [slider, field] of [
    [minSlider, 'ndvi_min'],
    [maxSlider, 'ndvi_max'],
  ] as Array<[HTMLInputElement, 'ndvi_min' | 'ndvi_max']>) {
    slider.addEventListener('input', () => {
      dispatch({ type: 'threshold_slid', field, value: Number(slider.value) });
      if (canAnalyze(state) && state.result) {
        submit(); // live re-analysis; the loop debounces and de-dupes
      }
    });
  }
  analyzeButton.addEventListener('click', submit);

  drawButton.addEventListener('click', () => {
    dispatch({ type: 'draw_started', crs: DRAW_CRS });
  });
  closeButton.addEventListener('click', () => {
    dispatch({ type: 'ring_closed' });
  });
  canvas.addEventListener('click', (event) => {
    if (state.drawing === null) {
      return;
    }
    const rect = canvas.getBoundingClientRect();
    const [x, y] = toWorld(event.clientX - rect.left, event.clientY - rect.top);
    dispatch({ type: 'vertex_added', x, y });
  });

  async function refreshUnits(level: number): Promise<void> {
    const name = datasetSelect.value;
    if (!name) {
      return;
    }
    const path = unitSelects
      .slice(0, level)
      .map((sel) => sel.value)
      .filter((v) => v !== '');
    try {
      const children = await client.datasetChildren(name, path);
      const target = unitSelects[level];
      if (!target) {
        return;
      }
      target.innerHTML = '<option value="">—</option>';
      for (const child of children) {
        const option = document.createElement('option');
        option.value = child;
        option.textContent = child;
        target.appendChild(option);
      }
      target.disabled = children.length === 0;
      unitSelects.slice(level + 1).forEach((sel) => {
        sel.innerHTML = '<option value="">—</option>';
        sel.disabled = true;
      });
    } catch (error) {
      if (error instanceof GatewayError && error.code === 'NO_SUCH_UNIT') {
        // The picked unit is already the deepest level.
        unitSelects.slice(level).forEach((sel) => {
          sel.innerHTML = '<option value="">—</option>';
          sel.disabled = true;
        });
        return;
      }
      status.textContent = `dataset ${name} is not available`;
    }
  }

  datasetSelect.addEventListener('change', () => void refreshUnits(0));
  unitSelects.forEach((select, level) => {
    select.addEventListener('change', () => {
      const path = unitSelects
        .slice(0, level + 1)
        .map((sel) => sel.value)
        .filter((v) => v !== '');
      if (path.length > 0) {
        dispatch({ type: 'dataset_chosen', name: datasetSelect.value, path });
      }
      void refreshUnits(level + 1);
    });
  });

  client
    .sensors()
    .then((doc) => dispatch({ type: 'registry_loaded', sensors: doc.sensors }))
    .catch((error) => dispatch({ type: 'registry_failed', message: String(error) }));

  render();
  client.datasetChildren('admin', []).then(
    (countries) => {
      if (countries.length > 0) {
        datasetSelect.innerHTML =
          '<option value="admin">administrative</option>';
        void refreshUnits(0);
      }
    },
    () => {
      datasetSelect.disabled = true;
    },
  );
}

mount();
