from datetime import datetime

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from .api.endpoints import channels, contours, geometry, lightcone, secondlaw
from .core.config import settings
from .core.error_handlers import setup_error_handlers
from .core.logger import get_logger

logger = get_logger(__name__)

app = FastAPI(
    title=settings.PROJECT_NAME,
    description="Relative-entropy second-law checks: ledgers, light-cone traces and entropy-current balances",
    version=settings.VERSION,
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

setup_error_handlers(app)

app.include_router(contours.router, prefix=f"{settings.API_V1_STR}/contours", tags=["contours"])
app.include_router(secondlaw.router, prefix=f"{settings.API_V1_STR}/secondlaw", tags=["secondlaw"])
app.include_router(lightcone.router, prefix=f"{settings.API_V1_STR}/lightcone", tags=["lightcone"])
app.include_router(geometry.router, prefix=f"{settings.API_V1_STR}/geometry", tags=["geometry"])
app.include_router(channels.router, prefix=f"{settings.API_V1_STR}/channels", tags=["channels"])


@app.get("/")
async def root():
    """API root endpoint"""
    return {
        "message": settings.PROJECT_NAME,
        "version": settings.VERSION,
        "status": "running",
        "documentation": "/docs",
    }


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "timestamp": datetime.now().isoformat(),
    }


if __name__ == "__main__":
    uvicorn.run(
        "src.backend.app.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.RELOAD,
        log_level=settings.LOG_LEVEL.lower(),
    )
