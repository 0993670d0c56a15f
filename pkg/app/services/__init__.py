# Import services as modules: from app.services import state_service
