from fusecalc.config import APP_NAME, APP_VERSION

__all__ = ['APP_NAME', 'APP_VERSION']
