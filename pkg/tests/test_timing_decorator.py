"""Тесты для utils/timing_decorator.py."""

from unittest.mock import patch

import pytest

from utils.timing_decorator import _format_duration, timing_decorator


class TestTimingDecorator:
    def test_sync_success_fast(self):
        @timing_decorator
        def fn():
            return "ok"

        assert fn() == "ok"

    @patch("utils.timing_decorator.time")
    def test_sync_success_slow_branch(self, mock_time):
        mock_time.time.side_effect = [0.0, 1.5]

        @timing_decorator
        def fn():
            return 1

        assert fn() == 1

    @patch("utils.timing_decorator.time")
    def test_sync_raises_logs_error(self, mock_time):
        mock_time.time.side_effect = [0.0, 0.01]

        @timing_decorator
        def fn():
            raise RuntimeError("fail")

        with pytest.raises(RuntimeError, match="fail"):
            fn()

    def test_preserves_metadata(self):
        @timing_decorator
        def documented():
            """Строка документации"""

        assert documented.__name__ == "documented"
        assert documented.__doc__ == "Строка документации"

    def test_logs_memory(self, mocker):
        logger = mocker.patch("utils.timing_decorator.logger")

        @timing_decorator
        def fn():
            return 2

        fn()

        message = logger.info.call_args[0][0]
        assert "fn()" in message
        assert "RSS" in message


class TestFormatDuration:
    def test_milliseconds(self):
        assert _format_duration(0.25) == "250.00ms"

    def test_seconds(self):
        assert _format_duration(2.5) == "2.50s"
