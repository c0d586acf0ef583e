"""
Results Store - SQLite Run Ledger
=================================

Service này lưu lịch sử các experiment đã chạy:
- kind, seed và toàn bộ plan parameters (JSON)
- đường dẫn CSV output, số rows và số rows lỗi
- thời điểm chạy

Architecture:
- SQLite database qua SQLAlchemy engine, raw text() statements
- Transaction bằng engine.begin()
- Lỗi ghi ledger chỉ được log, không làm hỏng experiment
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

from sqlalchemy import create_engine, text
from sqlalchemy.engine import Engine

from src import settings

logger = logging.getLogger(__name__)

_engines: Dict[str, Engine] = {}


def get_engine(db_path: str | None = None) -> Engine:
    """Engine cho db_path (default settings.DB_PATH), cache theo path."""
    db_path = db_path or settings.DB_PATH
    if db_path not in _engines:
        if db_path != ":memory:":
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)
        _engines[db_path] = create_engine(f"sqlite:///{db_path}", future=True)
    return _engines[db_path]


def init_db(db_path: str | None = None):
    """
    Khởi tạo database schema

    Tạo bảng runs nếu chưa có.
    """
    with get_engine(db_path).begin() as conn:
        conn.execute(text("""
        CREATE TABLE IF NOT EXISTS runs(
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            kind TEXT NOT NULL,
            seed INTEGER,
            params TEXT NOT NULL,
            csv_path TEXT,
            n_rows INTEGER DEFAULT 0,
            n_failed INTEGER DEFAULT 0,
            created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
        );"""))


def log_run(kind: str, params: dict, csv_path: str | None = None, seed: int | None = None,
            n_rows: int = 0, n_failed: int = 0, db_path: str | None = None) -> Optional[int]:
    """
    Ghi một run vào ledger

    Args:
        kind: Loại experiment (size, temperature, ...)
        params: Plan parameters (JSON-serializable)
        csv_path: CSV output chính
        seed: Seed của run
        n_rows, n_failed: Số rows và số rows lỗi

    Returns:
        ID của run, hoặc None nếu ghi thất bại
    """
    try:
        init_db(db_path)
        with get_engine(db_path).begin() as conn:
            result = conn.execute(text("""
            INSERT INTO runs(kind, seed, params, csv_path, n_rows, n_failed)
            VALUES(:k, :s, :p, :c, :n, :f)
            """), {"k": kind, "s": seed, "p": json.dumps(params, sort_keys=True, default=str),
                   "c": csv_path, "n": n_rows, "f": n_failed})
            run_id = result.lastrowid
        logger.info("Logged %s run %s (%d rows, %d failed)", kind, run_id, n_rows, n_failed)
        return run_id
    except Exception as e:
        logger.error("Error logging run: %s", e)
        return None


def _row_to_dict(row) -> Dict:
    return {
        "id": row[0],
        "kind": row[1],
        "seed": row[2],
        "params": json.loads(row[3]),
        "csv_path": row[4],
        "n_rows": row[5],
        "n_failed": row[6],
        "created_at": str(row[7]),
    }


def list_runs(kind: str | None = None, limit: int = 50, db_path: str | None = None) -> List[Dict]:
    """
    Lấy các run gần nhất

    Args:
        kind: Lọc theo loại experiment (optional)
        limit: Số run tối đa

    Returns:
        List run dicts, mới nhất trước
    """
    try:
        init_db(db_path)
        query = "SELECT id, kind, seed, params, csv_path, n_rows, n_failed, created_at FROM runs"
        args: Dict = {"l": limit}
        if kind is not None:
            query += " WHERE kind=:k"
            args["k"] = kind
        query += " ORDER BY id DESC LIMIT :l"
        with get_engine(db_path).begin() as conn:
            rows = conn.execute(text(query), args).fetchall()
        return [_row_to_dict(r) for r in rows]
    except Exception as e:
        logger.error("Error listing runs: %s", e)
        return []


def get_run(run_id: int, db_path: str | None = None) -> Optional[Dict]:
    init_db(db_path)
    with get_engine(db_path).begin() as conn:
        row = conn.execute(text("""
        SELECT id, kind, seed, params, csv_path, n_rows, n_failed, created_at FROM runs WHERE id=:i
        """), {"i": run_id}).fetchone()
    return _row_to_dict(row) if row else None
