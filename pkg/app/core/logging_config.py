import os
import logging

from app.core.config import get_settings

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(log_file: str = "toolkit.log") -> None:
    """
    Configure root logging once for the CLI and the HTTP app.

    Logs go to stderr; in development they are also written under LOG_DIR
    when that directory can be created.
    """
    if logging.getLogger().handlers:
        return

    settings = get_settings()
    log_level = getattr(logging, settings.log_level, logging.INFO)

    handlers = [logging.StreamHandler()]

    if not settings.is_production:
        try:
            os.makedirs(settings.log_dir, exist_ok=True)
            handlers.append(logging.FileHandler(os.path.join(settings.log_dir, log_file)))
        except Exception:
            # Read-only or ephemeral filesystem: stream only
            pass

    logging.basicConfig(level=log_level, format=LOG_FORMAT, handlers=handlers)
