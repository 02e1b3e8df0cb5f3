"""
Responses for run results. Ledgers and traces may hold +inf or nan, which the
default JSON response refuses, so tables are rendered by the runner.
"""
import json

from fastapi.responses import Response

from ..services.runner import RunResult, render_csv


def run_response(result: RunResult, fmt: str = "json") -> Response:
    if fmt == "csv":
        return Response(content=render_csv(result.columns, result.rows), media_type="text/csv")
    body = {
        "command": result.command,
        "passed": result.passed,
        "columns": result.columns,
        "rows": result.rows,
        "violations": result.violations,
    }
    return Response(content=json.dumps(body, default=str), media_type="application/json")
