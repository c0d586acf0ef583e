"""
Settings - Environment Configuration
====================================

Tập trung các cấu hình đọc từ environment (.env) cho toàn bộ project:
- Đường dẫn database ledger và thư mục output
- Ngưỡng dense/sparse cho operators và solver
- Số worker cho parallel sweeps
- Log level

Architecture:
- python-dotenv load .env một lần khi import
- Module-level constants, đọc bằng os.getenv với default
"""

import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
DB_PATH = os.getenv("DB_PATH", "./data/runs.sqlite")
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "./output")

# Hilbert-space operators are dense up to this many sites, sparse above
DENSE_THRESHOLD = int(os.getenv("DENSE_THRESHOLD", "6"))
# method="auto" uses the dense null-space solver up to this many sites
DENSE_SOLVER_MAX_SITES = int(os.getenv("DENSE_SOLVER_MAX_SITES", "4"))
RESIDUAL_TOLERANCE = float(os.getenv("RESIDUAL_TOLERANCE", "1e-12"))

MAX_WORKERS = int(os.getenv("MAX_WORKERS", "1"))
