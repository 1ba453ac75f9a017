import pytest

from citynav.procgen import CitySpec, generate_city


@pytest.fixture(scope="session")
def small_map():
    return generate_city(CitySpec(seed=11, target_area_km2=0.3))


@pytest.fixture(scope="session")
def small_easy_map():
    return generate_city(CitySpec(seed=11, target_area_km2=0.3).without_dynamics())


@pytest.fixture(scope="session")
def medium_easy_map():
    return generate_city(CitySpec(seed=21, target_area_km2=0.8).without_dynamics())


@pytest.fixture(scope="session")
def medium_hard_map():
    return generate_city(CitySpec(seed=21, target_area_km2=0.8))
