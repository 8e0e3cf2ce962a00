from .core import (
    AuthFailure,
    ChatRequest,
    ExhaustedRetries,
    Gateway,
    GatewayConfig,
    GatewayError,
    MalformedResponse,
    Transcript,
    chat,
)
from .mock import MockPolicy, mock_chat

__all__ = [
    "AuthFailure",
    "ChatRequest",
    "ExhaustedRetries",
    "Gateway",
    "GatewayConfig",
    "GatewayError",
    "MalformedResponse",
    "MockPolicy",
    "Transcript",
    "chat",
    "mock_chat",
]
