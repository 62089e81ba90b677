"""异常类测试.

测试所有自定义异常类型的消息与属性.
"""

import pytest

from hawkes_stein import (
    ConfigError,
    ConfigIssue,
    ConstructionError,
    CouplingError,
    DomainError,
    ExperimentNotFoundError,
    HawkesSteinException,
    MajorantViolationError,
    RegistrationError,
    ReportWriteError,
    StabilityError,
    UnsupportedKernelError,
)


class TestHawkesSteinException:
    """HawkesSteinException 测试."""

    def test_create_with_message(self) -> None:
        exc = HawkesSteinException("Test error")
        assert str(exc) == "HawkesSteinException: Test error"

    def test_create_with_context(self) -> None:
        exc = HawkesSteinException("Test error", "exponential")
        assert "exponential" in str(exc)

    @pytest.mark.parametrize(
        "exc",
        [
            DomainError("t", -1.0, "requires t >= 0"),
            StabilityError("exponential", "requires alpha < beta"),
            ConstructionError("TwoPoint", "p must lie in (0, 1)"),
            CouplingError("bands overlap"),
            UnsupportedKernelError("tabulated", "second_moment_ode"),
            ConfigError([]),
            ReportWriteError("out.csv"),
            RegistrationError("bound", "already registered"),
            ExperimentNotFoundError("rate"),
        ],
    )
    def test_inheritance(self, exc) -> None:
        """测试所有异常继承自基类."""
        assert isinstance(exc, HawkesSteinException)


class TestDomainError:
    """DomainError 测试."""

    def test_message(self) -> None:
        exc = DomainError("t", -1.0, "requires t >= 0")
        assert "Argument 't' = -1.0 is out of domain: requires t >= 0" in str(exc)
        assert (exc.argument, exc.value, exc.reason) == ("t", -1.0, "requires t >= 0")


class TestStabilityError:
    """StabilityError 测试."""

    def test_without_norm(self) -> None:
        exc = StabilityError("exponential", "requires alpha < beta")
        assert exc.reason == "requires alpha < beta"
        assert "stability: requires alpha < beta" in str(exc)
        assert "||phi||_1" not in str(exc)

    def test_with_norm(self) -> None:
        exc = StabilityError("tabulated", "requires ||phi||_1 < 1", l1_norm=1.25)
        assert "(||phi||_1 = 1.25)" in str(exc)
        assert exc.l1_norm == 1.25


class TestMajorantViolationError:
    """MajorantViolationError 测试."""

    def test_attributes(self) -> None:
        exc = MajorantViolationError(1.5, 3.0, 2.0)
        assert (exc.time, exc.intensity, exc.majorant) == (1.5, 3.0, 2.0)
        assert "majorant violated at t=1.5" in str(exc)


class TestConfigError:
    """ConfigError 测试."""

    def test_issue_format(self) -> None:
        assert str(ConfigIssue(5, "model.alpha", "bad")) == "line 5: model.alpha: bad"
        assert str(ConfigIssue(None, "model.mu", "missing required key")) == "<missing>: model.mu: missing required key"

    def test_aggregates_issues(self) -> None:
        issues = [ConfigIssue(2, "experiment.kind", "unknown"), ConfigIssue(None, "model.mu", "missing")]
        exc = ConfigError(issues)
        assert exc.issues == issues
        assert "2 configuration error(s)" in str(exc)
        assert "line 2: experiment.kind: unknown; <missing>: model.mu: missing" in str(exc)


class TestReportWriteError:
    """ReportWriteError 测试."""

    def test_with_cause(self) -> None:
        cause = PermissionError("denied")
        exc = ReportWriteError("bounds.csv", cause)
        assert exc.original_exception is cause
        assert "Failed to write artifact 'bounds.csv': denied" in str(exc)


class TestExperimentNotFoundError:
    """ExperimentNotFoundError 测试."""

    def test_lists_registered(self) -> None:
        exc = ExperimentNotFoundError("rate", ["moments", "bound"])
        assert "Experiment 'rate' is not registered" in str(exc)
        assert "Registered experiments: moments, bound" in str(exc)

    def test_without_registered(self) -> None:
        exc = ExperimentNotFoundError("rate")
        assert exc.registered == []
        assert "Registered" not in str(exc)
