from .app import build_feedback, create_app
from .models import FeedbackPayload
from .sessions import SessionStore

__all__ = ["build_feedback", "create_app", "FeedbackPayload", "SessionStore"]
