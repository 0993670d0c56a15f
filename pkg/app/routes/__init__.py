from app.routes.states import router as states_router
from app.routes.povm import router as povm_router
from app.routes.tomography import router as tomography_router
