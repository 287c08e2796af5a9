from .app import create_app
from .config import ServiceConfig
from .registry import NoPretrainedPolicy, PolicyRegistry
from .sessions import Session, SessionError, SessionManager
