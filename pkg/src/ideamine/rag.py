"""Corpus ingestion, chunking, and top-k retrieval over a flat vector index.

The store is an exact in-memory index (linear scan over unit vectors);
the corpus this engine targets is a handful of papers, so approximate
indexes would only add nondeterminism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gateway as gw
from .errors import EmptyDocument, EmptyStore, PreconditionError
from .storage import dump_json, load_json


@dataclass(frozen=True)
class RagConfig:
    node_length: int = 1024  # characters per chunk
    overlap: int = 128
    top_k: int = 3

    def __post_init__(self):
        if self.node_length <= 0:
            raise PreconditionError("node_length must be positive")
        if self.overlap < 0 or self.overlap >= self.node_length:
            raise PreconditionError("overlap must satisfy 0 <= overlap < node_length")
        if self.top_k < 1:
            raise PreconditionError("top_k must be >= 1")

    def to_dict(self) -> dict:
        return {"node_length": self.node_length, "overlap": self.overlap, "top_k": self.top_k}


@dataclass
class DocumentChunk:
    doc_id: str
    chunk_index: int
    text: str
    char_offset: int
    embedding: np.ndarray | None = None


@dataclass(frozen=True)
class RetrievalHit:
    chunk: DocumentChunk
    similarity: float


def chunk_document(doc_id: str, body: str, cfg: RagConfig) -> list[DocumentChunk]:
    """Slide a node_length window over the body with the configured overlap.

    A window starts every (node_length - overlap) characters while it can
    still reach overlap characters into the body; concatenating the chunks
    with their overlaps stripped reproduces the body exactly.
    """
    if not body:
        raise EmptyDocument(f"document {doc_id!r} is empty")
    n = len(body)
    if n <= cfg.node_length:
        return [DocumentChunk(doc_id, 0, body, 0)]
    stride = cfg.node_length - cfg.overlap
    chunks = []
    off = 0
    while off < n and off + cfg.overlap <= n:
        chunks.append(DocumentChunk(doc_id, len(chunks), body[off : off + cfg.node_length], off))
        off += stride
    return chunks


def reconstruct(chunks: list[DocumentChunk], overlap: int) -> str:
    """Inverse of chunk_document for one document's chunks, in order."""
    parts = []
    for i, c in enumerate(chunks):
        parts.append(c.text if i == 0 else c.text[overlap:])
    return "".join(parts)


class VectorStore:
    """Exact flat index over unit-vector chunk embeddings."""

    def __init__(self, chunks: list[DocumentChunk], embedder: gw.Backend, cfg: RagConfig):
        self.chunks = chunks
        self.embedder = embedder
        self.cfg = cfg
        if chunks:
            self._matrix = np.vstack([c.embedding for c in chunks])
        else:
            self._matrix = np.zeros((0, 0))

    @property
    def size(self) -> int:
        return len(self.chunks)

    def save(self, path: str | Path) -> None:
        dump_json(
            path,
            {
                "config": self.cfg.to_dict(),
                "chunks": [
                    {
                        "doc_id": c.doc_id,
                        "chunk_index": c.chunk_index,
                        "text": c.text,
                        "char_offset": c.char_offset,
                        "embedding": [float(x) for x in c.embedding],
                    }
                    for c in self.chunks
                ],
            },
        )

    @classmethod
    def load(cls, path: str | Path, embedder: gw.Backend) -> "VectorStore":
        data = load_json(path)
        cfg = RagConfig(**data["config"])
        chunks = [
            DocumentChunk(
                doc_id=c["doc_id"],
                chunk_index=c["chunk_index"],
                text=c["text"],
                char_offset=c["char_offset"],
                embedding=np.asarray(c["embedding"], dtype=np.float64),
            )
            for c in data["chunks"]
        ]
        return cls(chunks, embedder, cfg)


def index(chunks: list[DocumentChunk], embedder: gw.Backend, cfg: RagConfig | None = None) -> VectorStore:
    """Embed every chunk and build a store over them."""
    if not chunks:
        raise PreconditionError("index() needs at least one chunk")
    vectors = gw.embed([c.text for c in chunks], embedder)
    for c, v in zip(chunks, vectors):
        c.embedding = v
    return VectorStore(chunks, embedder, cfg or RagConfig())


def retrieve(query: str, store: VectorStore, cfg: RagConfig) -> list[RetrievalHit]:
    """Top-k chunks by cosine similarity, ties broken by (doc_id, chunk_index)."""
    if store.size == 0:
        raise EmptyStore("retrieve() against an empty store")
    qvec = gw.embed([query], store.embedder)[0]
    sims = store._matrix @ qvec
    order = sorted(
        range(store.size),
        key=lambda i: (-sims[i], store.chunks[i].doc_id, store.chunks[i].chunk_index),
    )
    hits = []
    for i in order[: cfg.top_k]:
        sim = float(np.clip(sims[i], -1.0, 1.0))
        hits.append(RetrievalHit(chunk=store.chunks[i], similarity=sim))
    return hits


def assemble_context(hits: list[RetrievalHit], char_budget: int) -> str:
    """Greedy-pack hits (in similarity order) under the budget.

    A chunk that does not fit whole is dropped, never truncated; later,
    smaller chunks may still fit.
    """
    if char_budget <= 0:
        raise PreconditionError("char_budget must be positive")
    sep = "\n\n"
    blocks: list[str] = []
    remaining = char_budget
    for hit in hits:
        block = f"[{hit.chunk.doc_id}#{hit.chunk.chunk_index}]\n{hit.chunk.text}"
        cost = len(block) if not blocks else len(sep) + len(block)
        if cost <= remaining:
            blocks.append(block)
            remaining -= cost
    return sep.join(blocks)


def ingest_corpus(corpus_dir: str | Path, cfg: RagConfig, embedder: gw.Backend) -> VectorStore:
    """Chunk and index every .txt/.md file under corpus_dir; persist index.json."""
    corpus_dir = Path(corpus_dir)
    docs = sorted(
        p for p in corpus_dir.iterdir() if p.suffix.lower() in (".txt", ".md") and p.is_file()
    )
    if not docs:
        raise PreconditionError(f"no .txt or .md documents in {corpus_dir}")
    chunks: list[DocumentChunk] = []
    for doc in docs:
        body = doc.read_text(encoding="utf-8")
        if not body:
            continue
        chunks.extend(chunk_document(doc.stem, body, cfg))
    store = index(chunks, embedder, cfg)
    store.save(corpus_dir / "index.json")
    return store


def load_index(corpus_dir: str | Path, embedder: gw.Backend) -> VectorStore:
    return VectorStore.load(Path(corpus_dir) / "index.json", embedder)
