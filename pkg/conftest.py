import pytest
pytest.register_assert_rewrite("plaplib.testing")


@pytest.fixture(scope='function')
def expected_contents_text(request) -> str:
    from plaplib.testing import OUTPUT_PATH

    marker = request.node.get_closest_marker('expected_filename')
    name = str(marker.args[0])
    with open(OUTPUT_PATH / name, 'r', newline='') as f:
        return f.read()
