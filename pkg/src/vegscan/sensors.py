"""Registry of supported satellite platforms and user-parameter validation.

The registry is immutable and all functions here are pure, so everything in
this module is safe to call from any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

from .errors import UnknownSensor

# Violation codes. The sensor-window rule is split into before/after so the
# offending field (start vs end date) can be highlighted precisely.
DATE_BEFORE_SENSOR = "DATE_BEFORE_SENSOR"
DATE_AFTER_SENSOR = "DATE_AFTER_SENSOR"
DATE_ORDER = "DATE_ORDER"
NDVI_ORDER = "NDVI_ORDER"
NDVI_RANGE = "NDVI_RANGE"
CLOUD_RANGE = "CLOUD_RANGE"
ROI_MISSING = "ROI_MISSING"
UNKNOWN_SENSOR = "UNKNOWN_SENSOR"


@dataclass(frozen=True)
class SensorSpec:
    """Per-platform configuration: bands, scaling, availability, QA scheme."""

    sensor_id: str
    red_band: str
    nir_band: str
    qa_band: str
    mask_scheme: str  # "SCL" | "QA_L89" | "QA_L57"
    reflectance_scale: float
    reflectance_offset: float
    availability_start: date
    availability_end: date | None  # None = still operational
    native_scale_m: float
    cloud_metadata_key: str

    def __post_init__(self):
        if self.reflectance_scale <= 0:
            raise ValueError("reflectance_scale must be > 0")
        if self.red_band == self.nir_band:
            raise ValueError("red and NIR bands must differ")
        if (
            self.availability_end is not None
            and not self.availability_start < self.availability_end
        ):
            raise ValueError("availability window is empty")

    def availability_end_effective(self, today: date | None = None) -> date:
        """Closed end date, or the current date for operational platforms."""
        if self.availability_end is not None:
            return self.availability_end
        return today if today is not None else date.today()


_LANDSAT_SCALE = 0.0000275
_LANDSAT_OFFSET = -0.2

SENSOR_REGISTRY: tuple[SensorSpec, ...] = (
    SensorSpec(
        sensor_id="Sentinel-2",
        red_band="B4",
        nir_band="B8",
        qa_band="SCL",
        mask_scheme="SCL",
        # harmonized surface reflectance ships as DN/10000; NDVI is a ratio,
        # so the factor cancels and cannot change any index value
        reflectance_scale=1.0 / 10000.0,
        reflectance_offset=0.0,
        availability_start=date(2017, 3, 28),
        availability_end=None,
        native_scale_m=10.0,
        cloud_metadata_key="CLOUDY_PIXEL_PERCENTAGE",
    ),
    SensorSpec(
        sensor_id="Landsat 9",
        red_band="SR_B4",
        nir_band="SR_B5",
        qa_band="QA_PIXEL",
        mask_scheme="QA_L89",
        reflectance_scale=_LANDSAT_SCALE,
        reflectance_offset=_LANDSAT_OFFSET,
        availability_start=date(2021, 10, 31),
        availability_end=None,
        native_scale_m=30.0,
        cloud_metadata_key="CLOUD_COVER",
    ),
    SensorSpec(
        sensor_id="Landsat 8",
        red_band="SR_B4",
        nir_band="SR_B5",
        qa_band="QA_PIXEL",
        mask_scheme="QA_L89",
        reflectance_scale=_LANDSAT_SCALE,
        reflectance_offset=_LANDSAT_OFFSET,
        availability_start=date(2013, 4, 11),
        availability_end=None,
        native_scale_m=30.0,
        cloud_metadata_key="CLOUD_COVER",
    ),
    SensorSpec(
        sensor_id="Landsat 7",
        red_band="SR_B3",
        nir_band="SR_B4",
        qa_band="QA_PIXEL",
        mask_scheme="QA_L57",
        reflectance_scale=_LANDSAT_SCALE,
        reflectance_offset=_LANDSAT_OFFSET,
        availability_start=date(1999, 5, 28),
        availability_end=date(2022, 3, 30),
        native_scale_m=30.0,
        cloud_metadata_key="CLOUD_COVER",
    ),
    SensorSpec(
        sensor_id="Landsat 5",
        red_band="SR_B3",
        nir_band="SR_B4",
        qa_band="QA_PIXEL",
        mask_scheme="QA_L57",
        reflectance_scale=_LANDSAT_SCALE,
        reflectance_offset=_LANDSAT_OFFSET,
        availability_start=date(1984, 3, 16),
        availability_end=date(2012, 5, 5),
        native_scale_m=30.0,
        cloud_metadata_key="CLOUD_COVER",
    ),
)


def _canonical(sensor_id: str) -> str:
    return sensor_id.strip().lower().replace("-", " ").replace("_", " ")


_BY_ID = {_canonical(s.sensor_id): s for s in SENSOR_REGISTRY}


def lookup_sensor(sensor_id: str) -> SensorSpec:
    """Find a registry entry; matching ignores case and -/_/space choice."""
    spec = _BY_ID.get(_canonical(sensor_id))
    if spec is None:
        known = ", ".join(s.sensor_id for s in SENSOR_REGISTRY)
        raise UnknownSensor(f"unknown sensor {sensor_id!r}; supported: {known}")
    return spec


def registry_document() -> dict:
    """Machine-readable registry snapshot (served by the gateway)."""
    return {
        "sensors": [
            {
                "sensor_id": s.sensor_id,
                "red_band": s.red_band,
                "nir_band": s.nir_band,
                "qa_band": s.qa_band,
                "mask_scheme": s.mask_scheme,
                "reflectance_scale": s.reflectance_scale,
                "reflectance_offset": s.reflectance_offset,
                "availability_start": s.availability_start.isoformat(),
                "availability_end": (
                    s.availability_end.isoformat() if s.availability_end else None
                ),
                "native_scale_m": s.native_scale_m,
                "cloud_metadata_key": s.cloud_metadata_key,
            }
            for s in SENSOR_REGISTRY
        ]
    }


@dataclass
class AnalysisParams:
    """User-entered analysis parameters.

    Deliberately allowed to hold invalid drafts; every constraint is
    enforced through :func:`validate_params` so a UI can collect all
    problems in one pass.
    """

    sensor_id: str
    start_date: date
    end_date: date
    ndvi_min: float
    ndvi_max: float
    max_cloud_pct: float


@dataclass(frozen=True)
class Violation:
    code: str
    field: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"code": v.code, "field": v.field, "message": v.message}
                for v in self.violations
            ],
        }


def validate_params(
    params: AnalysisParams,
    spec: SensorSpec | None,
    roi_defined: bool,
    today: date | None = None,
) -> ValidationReport:
    """Check every rule and report all violations at once (never fail-fast).

    Date-range filtering downstream is inclusive on both ends, so
    ``start_date == end_date`` is admissible. Open availability windows are
    checked against ``today``. ``spec=None`` means the sensor id did not
    resolve; availability checks are skipped and the id itself is flagged.
    """
    violations: list[Violation] = []

    if spec is None:
        violations.append(
            Violation(
                UNKNOWN_SENSOR,
                "sensor_id",
                f"unknown sensor {params.sensor_id!r}",
            )
        )
    else:
        if params.start_date < spec.availability_start:
            violations.append(
                Violation(
                    DATE_BEFORE_SENSOR,
                    "start_date",
                    f"{spec.sensor_id} data begins "
                    f"{spec.availability_start.isoformat()}",
                )
            )
        window_end = spec.availability_end_effective(today)
        if params.end_date > window_end:
            violations.append(
                Violation(
                    DATE_AFTER_SENSOR,
                    "end_date",
                    f"{spec.sensor_id} data ends {window_end.isoformat()}",
                )
            )
    if params.end_date < params.start_date:
        violations.append(
            Violation(DATE_ORDER, "end_date", "end date precedes start date")
        )

    for name, value in (("ndvi_min", params.ndvi_min), ("ndvi_max", params.ndvi_max)):
        if not -1.0 <= value <= 1.0:
            violations.append(
                Violation(NDVI_RANGE, name, f"{name}={value} outside [-1, 1]")
            )
    if params.ndvi_min >= params.ndvi_max:
        violations.append(
            Violation(
                NDVI_ORDER,
                "ndvi_min",
                "minimum NDVI threshold must be strictly below the maximum",
            )
        )

    if not 0.0 <= params.max_cloud_pct <= 100.0:
        violations.append(
            Violation(
                CLOUD_RANGE,
                "max_cloud_pct",
                f"cloud cover {params.max_cloud_pct} outside [0, 100]",
            )
        )

    if not roi_defined:
        violations.append(
            Violation(ROI_MISSING, "roi", "no region of interest defined")
        )

    return ValidationReport(tuple(violations))
