"""
File Utilities
Reading inputs, writing artifacts and hashing configurations.
"""

import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Union

logger = logging.getLogger(__name__)

STDIO = "-"


class FileUtils:
    """Utility functions for file operations"""

    @staticmethod
    def read_text(path: Union[str, Path]) -> str:
        """Read a text file, or standard input for '-'"""
        if str(path) == STDIO:
            return sys.stdin.read()
        return Path(path).read_text(encoding='utf-8')

    @staticmethod
    def write_text(path: Optional[Union[str, Path]], text: str) -> None:
        """Write text to a file, or standard output for '-' or None"""
        if path is None or str(path) == STDIO:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding='utf-8')
        logger.debug(f"Wrote {len(text)} characters to {target}")

    @staticmethod
    def get_text_hash(text: str, algorithm: str = 'sha256') -> str:
        """Hash of a string"""
        if algorithm == 'md5':
            hash_obj = hashlib.md5()
        elif algorithm == 'sha1':
            hash_obj = hashlib.sha1()
        elif algorithm == 'sha256':
            hash_obj = hashlib.sha256()
        else:
            raise ValueError(f"Unsupported hash algorithm: {algorithm}")
        hash_obj.update(text.encode('utf-8'))
        return hash_obj.hexdigest()

    @staticmethod
    def get_config_hash(data: Any, length: int = 16) -> str:
        """Short stable hash of a JSON-serialisable description"""
        canonical = json.dumps(data, sort_keys=True, separators=(',', ':'), default=str)
        return FileUtils.get_text_hash(canonical)[:length]

    @staticmethod
    def get_file_hash(file_path: Union[str, Path], algorithm: str = 'sha256') -> Optional[str]:
        """Hash of a file's contents"""
        try:
            return FileUtils.get_text_hash(Path(file_path).read_text(encoding='utf-8'), algorithm)
        except OSError as e:
            logger.error(f"Error hashing {file_path}: {e}")
            return None
