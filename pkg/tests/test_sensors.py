from datetime import date

import pytest

from vegscan.errors import UnknownSensor
from vegscan.sensors import (
    AnalysisParams,
    CLOUD_RANGE,
    DATE_AFTER_SENSOR,
    DATE_BEFORE_SENSOR,
    DATE_ORDER,
    NDVI_ORDER,
    NDVI_RANGE,
    ROI_MISSING,
    SENSOR_REGISTRY,
    UNKNOWN_SENSOR,
    lookup_sensor,
    registry_document,
    validate_params,
)

TODAY = date(2024, 6, 1)


def make_params(**overrides) -> AnalysisParams:
    base = dict(
        sensor_id="Sentinel-2",
        start_date=date(2021, 1, 1),
        end_date=date(2021, 3, 31),
        ndvi_min=-1.0,
        ndvi_max=1.0,
        max_cloud_pct=10.0,
    )
    base.update(overrides)
    return AnalysisParams(**base)


def run_validation(params, roi_defined=True):
    try:
        spec = lookup_sensor(params.sensor_id)
    except UnknownSensor:
        spec = None
    return validate_params(params, spec, roi_defined, today=TODAY)


class TestRegistry:
    def test_five_platforms(self):
        assert len(SENSOR_REGISTRY) == 5

    @pytest.mark.parametrize(
        "sensor_id, start, end",
        [
            ("Sentinel-2", date(2017, 3, 28), None),
            ("Landsat 9", date(2021, 10, 31), None),
            ("Landsat 8", date(2013, 4, 11), None),
            ("Landsat 7", date(1999, 5, 28), date(2022, 3, 30)),
            ("Landsat 5", date(1984, 3, 16), date(2012, 5, 5)),
        ],
    )
    def test_availability_windows(self, sensor_id, start, end):
        spec = lookup_sensor(sensor_id)
        assert spec.availability_start == start
        assert spec.availability_end == end

    @pytest.mark.parametrize(
        "sensor_id, red, nir, scale",
        [
            ("Sentinel-2", "B4", "B8", 10.0),
            ("Landsat 9", "SR_B4", "SR_B5", 30.0),
            ("Landsat 8", "SR_B4", "SR_B5", 30.0),
            ("Landsat 7", "SR_B3", "SR_B4", 30.0),
            ("Landsat 5", "SR_B3", "SR_B4", 30.0),
        ],
    )
    def test_band_assignments(self, sensor_id, red, nir, scale):
        spec = lookup_sensor(sensor_id)
        assert spec.red_band == red
        assert spec.nir_band == nir
        assert spec.native_scale_m == scale

    def test_landsat_reflectance_constants(self):
        for name in ("Landsat 5", "Landsat 7", "Landsat 8", "Landsat 9"):
            spec = lookup_sensor(name)
            assert spec.reflectance_scale == 0.0000275
            assert spec.reflectance_offset == -0.2

    def test_sentinel_reflectance_is_pure_scaling(self):
        spec = lookup_sensor("Sentinel-2")
        assert spec.reflectance_scale == pytest.approx(1e-4)
        assert spec.reflectance_offset == 0.0

    def test_cloud_metadata_keys(self):
        assert lookup_sensor("Sentinel-2").cloud_metadata_key == "CLOUDY_PIXEL_PERCENTAGE"
        assert lookup_sensor("Landsat 8").cloud_metadata_key == "CLOUD_COVER"

    def test_lookup_is_forgiving_about_separators(self):
        assert lookup_sensor("sentinel-2").sensor_id == "Sentinel-2"
        assert lookup_sensor("LANDSAT_8").sensor_id == "Landsat 8"
        assert lookup_sensor("landsat 9").sensor_id == "Landsat 9"

    def test_unknown_sensor_raises(self):
        with pytest.raises(UnknownSensor):
            lookup_sensor("MODIS")

    def test_registry_document_shape(self):
        doc = registry_document()
        assert len(doc["sensors"]) == 5
        s2 = doc["sensors"][0]
        assert s2["sensor_id"] == "Sentinel-2"
        assert s2["availability_start"] == "2017-03-28"
        assert s2["availability_end"] is None


class TestValidationMatrix:
    """Each rule has a dedicated trigger that flags only its own field."""

    def test_fully_valid_request_is_clean(self):
        report = run_validation(make_params())
        assert report.ok
        assert report.violations == ()

    def test_date_before_sensor(self):
        report = run_validation(make_params(start_date=date(2016, 6, 1)))
        assert report.codes() == {DATE_BEFORE_SENSOR}
        assert report.violations[0].field == "start_date"

    def test_date_after_decommission(self):
        report = run_validation(
            make_params(
                sensor_id="Landsat 5",
                start_date=date(2011, 1, 1),
                end_date=date(2013, 1, 1),
            )
        )
        assert report.codes() == {DATE_AFTER_SENSOR}
        assert report.violations[0].field == "end_date"

    def test_open_window_checked_against_today(self):
        report = run_validation(
            make_params(start_date=date(2024, 1, 1), end_date=date(2030, 1, 1))
        )
        assert report.codes() == {DATE_AFTER_SENSOR}

    def test_date_order(self):
        report = run_validation(
            make_params(start_date=date(2021, 3, 1), end_date=date(2021, 2, 1))
        )
        assert report.codes() == {DATE_ORDER}
        assert report.violations[0].field == "end_date"

    def test_equal_dates_are_allowed(self):
        report = run_validation(
            make_params(start_date=date(2021, 2, 1), end_date=date(2021, 2, 1))
        )
        assert report.ok

    def test_ndvi_order(self):
        report = run_validation(make_params(ndvi_min=0.9, ndvi_max=0.2))
        assert report.codes() == {NDVI_ORDER}
        assert report.violations[0].field == "ndvi_min"

    def test_equal_thresholds_rejected(self):
        report = run_validation(make_params(ndvi_min=0.5, ndvi_max=0.5))
        assert report.codes() == {NDVI_ORDER}

    def test_ndvi_range_low_field(self):
        report = run_validation(make_params(ndvi_min=-1.5))
        assert report.codes() == {NDVI_RANGE}
        assert report.violations[0].field == "ndvi_min"

    def test_ndvi_range_high_field(self):
        report = run_validation(make_params(ndvi_max=1.5))
        assert report.codes() == {NDVI_RANGE}
        assert report.violations[0].field == "ndvi_max"

    def test_full_range_endpoints_are_valid(self):
        report = run_validation(make_params(ndvi_min=-1.0, ndvi_max=1.0))
        assert report.ok

    def test_cloud_range(self):
        for bad in (-5.0, 150.0):
            report = run_validation(make_params(max_cloud_pct=bad))
            assert report.codes() == {CLOUD_RANGE}
            assert report.violations[0].field == "max_cloud_pct"

    def test_cloud_endpoints_valid(self):
        assert run_validation(make_params(max_cloud_pct=0.0)).ok
        assert run_validation(make_params(max_cloud_pct=100.0)).ok

    def test_roi_missing(self):
        report = run_validation(make_params(), roi_defined=False)
        assert report.codes() == {ROI_MISSING}
        assert report.violations[0].field == "roi"

    def test_unknown_sensor_code(self):
        report = run_validation(make_params(sensor_id="MODIS"))
        assert report.codes() == {UNKNOWN_SENSOR}
        assert report.violations[0].field == "sensor_id"

    def test_violations_accumulate(self):
        report = run_validation(
            make_params(
                start_date=date(2016, 1, 1),
                end_date=date(2015, 1, 1),
                ndvi_min=2.0,
                ndvi_max=-2.0,
                max_cloud_pct=300.0,
            ),
            roi_defined=False,
        )
        assert report.codes() == {
            DATE_BEFORE_SENSOR,
            DATE_ORDER,
            NDVI_ORDER,
            NDVI_RANGE,
            CLOUD_RANGE,
            ROI_MISSING,
        }
        # both thresholds are out of range, each flagged on its own field
        range_fields = {
            v.field for v in report.violations if v.code == NDVI_RANGE
        }
        assert range_fields == {"ndvi_min", "ndvi_max"}

    def test_report_serialization(self):
        report = run_validation(make_params(ndvi_min=-2.0))
        doc = report.to_dict()
        assert doc["ok"] is False
        assert doc["violations"][0]["code"] == NDVI_RANGE
        assert set(doc["violations"][0]) == {"code", "field", "message"}
