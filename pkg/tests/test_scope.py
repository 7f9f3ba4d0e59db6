from homoglab import current_scope, init
from homoglab.lab import GLOBAL_LAB, Lab, Settings, current_settings, map_jobs


def test_lab_singleton():
    assert Lab.current == GLOBAL_LAB
    scope = Lab.current.scope()
    assert scope.context == {}
    assert scope.stack == []
    assert scope == current_scope()


def test_scope_context():
    scope = Lab.current.scope()
    assert scope.context == {}
    assert scope.stack == []
    with scope:
        assert scope.stack == [{}]
        scope.context["foo"] = "bar"
        with scope:
            assert scope.stack == [{}, {"foo": "bar"}]
            assert scope.context == {"foo": "bar"}
            scope["bar"] = "bazz"
            with scope:
                assert scope.context == {"foo": "bar", "bar": "bazz"}
                scope.context.clear()
        assert scope.context == {"foo": "bar"}
        assert scope.stack == [{}]
    assert scope.context == {}
    assert scope.stack == []


def test_init_binds_settings():
    settings = init(tolerance=1e-8, averaging="arithmetic", jobs=3)
    assert current_settings() is settings
    assert settings == Settings(tolerance=1e-8, averaging="arithmetic", jobs=3)


def test_iteration_cap():
    assert Settings(max_iterations=7).iteration_cap(10_000) == 7
    assert Settings().iteration_cap(10_000) == 15_000


def test_map_jobs_keeps_order_and_context():
    init(jobs=4)

    def _work(item):
        return item * 2, current_settings().jobs

    assert map_jobs(_work, range(6)) == [(i * 2, 4) for i in range(6)]


def test_map_jobs_serial():
    assert map_jobs(str, [1, 2]) == ["1", "2"]
