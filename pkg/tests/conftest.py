import pytest

from hexalect.store import LanguageFamily


@pytest.fixture
def make_family():
    def _make(family_id="fam", lon_min=5.0, lat_min=45.0, lon_max=7.0,
              lat_max=47.0, resolution=0.1, divisions=(), direction="LTR"):
        return LanguageFamily(
            family_id=family_id,
            display_name=family_id.title(),
            bounding_box=(lon_min, lat_min, lon_max, lat_max),
            hex_resolution=resolution,
            admin_divisions=tuple(divisions),
            writing_direction=direction,
        )
    return _make


@pytest.fixture
def family(make_family):
    return make_family()
