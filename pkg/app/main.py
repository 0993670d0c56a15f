from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
import logging
import os
import uvicorn

from app.core.config import get_settings
from app.core.logging_config import configure_logging

configure_logging("app.log")

logger = logging.getLogger(__name__)

# Create the FastAPI app
app = FastAPI(
    title="GHZ to W Conversion Toolkit API",
    description="State preparation, local filtering, tomography simulation and maximum-likelihood reconstruction",
    version="1.0.0"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

from app.routes import states_router, povm_router, tomography_router

app.include_router(states_router)
app.include_router(povm_router)
app.include_router(tomography_router)


@app.get("/health")
async def health_check():
    """
    Health check endpoint
    """
    logger.info("Health check performed")
    return {"status": "healthy"}


@app.on_event("startup")
async def startup_event():
    settings = get_settings()
    logger.info(
        f"Application startup ({settings.environment}; MLE cap {settings.mle_max_iterations} iterations, "
        f"{settings.local_opt_starts} local-unitary starts)"
    )


@app.on_event("shutdown")
async def shutdown_event():
    logger.info("Application shutdown")


if __name__ == "__main__":
    port = int(os.environ.get("PORT", 8000))
    uvicorn.run("app.main:app", host="0.0.0.0", port=port, reload=True)
