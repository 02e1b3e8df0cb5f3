from fastapi import Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .exceptions import ToolkitError
from .logger import get_logger

logger = get_logger(__name__)


async def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Handle request validation errors"""
    logger.error(f"Validation error: {exc.errors()}")
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={
            "detail": "Validation error",
            "errors": [{k: str(v) if k == "ctx" else v for k, v in err.items()} for err in exc.errors()],
        },
    )


async def toolkit_exception_handler(request: Request, exc: ToolkitError):
    """Handle precondition and contract failures raised by the services"""
    logger.error(f"{type(exc).__name__}: {exc}")
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={
            "detail": str(exc),
            "type": type(exc).__name__,
        },
    )


async def general_exception_handler(request: Request, exc: Exception):
    """Handle general exceptions"""
    logger.error(f"Unhandled error: {str(exc)}")
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={
            "detail": "An unexpected error occurred",
            "type": "server_error",
        },
    )


def setup_error_handlers(app):
    """Setup all error handlers"""
    app.add_exception_handler(RequestValidationError, validation_exception_handler)
    app.add_exception_handler(ToolkitError, toolkit_exception_handler)
    app.add_exception_handler(Exception, general_exception_handler)
