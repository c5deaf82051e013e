import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")
    config._acceptance_results = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when not in ("setup", "call"):
        return
    number, title = marker.args
    results = item.config._acceptance_results
    failed = call.excinfo is not None
    if call.when == "call" or failed:
        results[number] = (title, results.get(number, (title, True))[1] and not failed)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_acceptance_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok = results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number:2d} {title}")
