#!/usr/bin/env python
import io
import mmap
import os
import tempfile
from contextlib import contextmanager
from typing import BinaryIO, Union

import xxhash

DIGEST_ALGORITHM = "xxh3_128"
_CHUNK = 1 << 20


def stream_digest(stream: BinaryIO) -> str:
	hasher = xxhash.xxh3_128()
	for chunk in iter(lambda: stream.read(_CHUNK), b""):
		hasher.update(chunk)
	return hasher.hexdigest()


def file_digest(path: Union[str, os.PathLike]) -> str:
	"""
	Hex digest of a whole file, read in chunks.
	"""
	with open(path, "rb") as fd:
		return stream_digest(fd)


def bytes_digest(data: bytes) -> str:
	"""
	Self-describing digest of a byte string: `xxh3_128:<hex>`.
	"""
	return f"{DIGEST_ALGORITHM}:{xxhash.xxh3_128(data).hexdigest()}"


def sink_is_empty(sink: BinaryIO) -> bool:
	"""
	True when a writable binary sink holds no bytes yet.
	"""
	try:
		position = sink.tell()
		end = sink.seek(0, os.SEEK_END)
		sink.seek(position)
		return end == 0
	except (OSError, AttributeError):
		return getattr(sink, "tell", lambda: 0)() == 0


def write_atomic(path, data: Union[bytes, str]) -> None:
	"""
	Write a file under a temporary name in the same directory and rename it into place.
	"""
	if isinstance(data, str):
		data = data.encode("utf-8")
	directory = os.path.dirname(os.path.abspath(path))
	fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
	try:
		with os.fdopen(fd, "wb") as tmp:
			tmp.write(data)
			tmp.flush()
			os.fsync(tmp.fileno())
		os.replace(tmp_path, path)
	except BaseException:
		if os.path.exists(tmp_path):
			os.unlink(tmp_path)
		raise


def publish(src, dst) -> None:
	"""
	Move a finished file to its final name, refusing to replace an existing file.

	:raises FileExistsError: If `dst` already exists.
	"""
	try:
		os.link(src, dst)
	except FileExistsError:
		raise
	except OSError:
		# filesystems without hard links
		if os.path.exists(dst):
			raise FileExistsError(dst)
		os.rename(src, dst)
		return
	os.unlink(src)


@contextmanager
def open_source(source):
	"""
	Open a readable binary source: a path, a byte string or an already open stream.
	Streams are handed back as they are and left open.
	"""
	if isinstance(source, (str, os.PathLike)):
		with open(source, "rb") as fd:
			yield fd
	elif isinstance(source, (bytes, bytearray, memoryview)):
		yield io.BytesIO(bytes(source))
	else:
		yield source


def source_size(stream: BinaryIO) -> int:
	position = stream.tell()
	size = stream.seek(0, os.SEEK_END)
	stream.seek(position)
	return size


@contextmanager
def map_source(source):
	"""
	Expose a source as a random access buffer: an mmap for files, the bytes themselves otherwise.
	"""
	if isinstance(source, (bytes, bytearray)):
		yield bytes(source)
		return
	with open_source(source) as stream:
		if source_size(stream) == 0:
			yield b""
			return
		try:
			mapped = mmap.mmap(stream.fileno(), 0, access=mmap.ACCESS_READ)
		except (AttributeError, OSError, io.UnsupportedOperation):
			stream.seek(0)
			yield stream.read()
			return
		try:
			yield mapped
		finally:
			mapped.close()
