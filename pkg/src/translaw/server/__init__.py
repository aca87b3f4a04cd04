from .app import JobManager, ServerConfig, build_services, create_app

__all__ = ["JobManager", "ServerConfig", "build_services", "create_app"]
