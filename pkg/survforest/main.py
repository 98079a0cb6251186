"""
Survival Forest Toolkit - Main Entry Point.

Command-line front end for similarity-based random survival forests:
- Synthetic data generation with known subspace structure
- Plain and similarity-weighted random survival forests
- Time-varying AUC evaluation and method comparison
- Reproducible runs with manifests and quarantined failures
"""

from survforest.cli.commands import app
from survforest.core.config import settings
from survforest.core.logging import get_logger

logger = get_logger(__name__)


@app.callback()
def root():
    """
    Similarity-based random survival forest toolkit.
    """
    logger.debug(f"{settings.APP_NAME} {settings.APP_VERSION}")


def run():
    app()


if __name__ == "__main__":
    run()
