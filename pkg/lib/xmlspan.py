"""
Byte-accurate element spans over raw UTF-8 XML.

Most XML parsers hand out trees or events without telling where in the
encoded input an element starts and ends. Expat does report the byte index of
every event, which is all that is needed to recover exact spans: an element
starts at the `<` of its start tag and ends after the `>` of its end tag (or
of its empty-element tag). The tokenizer feeds the input in chunks, so it
works over an `mmap` of a multi-gigabyte tape as well as over a short slice.
CDATA sections, comments and attribute values containing markup characters
are handled by expat itself and never confuse the spans.

Document type declarations are refused; tapes, wrappers and payloads never
need them.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional
from xml.parsers import expat

_CHUNK = 1 << 20
_SEPARATOR = " "


class XmlSpanError(Exception):
    """
    Raised when the input is not well-formed XML.

    Attributes:
        offset (int): Byte offset of the problem in the input.
    """

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


@dataclass
class ElementSpan:
    """
    One element and where its bytes are.

    `start`/`end` delimit the whole element (end exclusive); `content_start`/
    `content_end` delimit what lies between its start and end tags and are
    None for empty elements.
    """

    depth: int
    namespace: Optional[str]
    name: str
    start: int
    attributes: Dict[str, str] = field(default_factory=dict)
    end: int = -1
    content_start: Optional[int] = None
    content_end: Optional[int] = None
    text_parts: List[str] = field(default_factory=list)
    child_count: int = 0

    @property
    def text(self) -> str:
        return "".join(self.text_parts)

    def is_(self, namespace: Optional[str], name: str) -> bool:
        return self.namespace == namespace and self.name == name


def _split(qualified: str):
    if _SEPARATOR in qualified:
        namespace, local = qualified.split(_SEPARATOR, 1)
        return namespace, local
    return None, qualified


def tag_end(buffer, index: int) -> int:
    """
    Position just after the `>` closing the tag that starts at `index`.

    Quoted attribute values are skipped, so a `>` inside a value does not end the tag.
    """
    quote = None
    position = index
    size = len(buffer)
    while position < size:
        window = buffer[position:position + 256]
        for offset, byte in enumerate(window):
            if quote is not None:
                if byte == quote:
                    quote = None
            elif byte in (0x22, 0x27):
                quote = byte
            elif byte == 0x3E:
                return position + offset + 1
        position += len(window)
    raise XmlSpanError("unterminated tag", index)


class SpanTokenizer:
    """
    Streams a buffer through expat and reports element spans down to `max_depth`.

    Args:
        buffer: `bytes` or an `mmap` holding the encoded document.
        max_depth (int): Deepest element level (root = 1) that gets a span.
        on_start: Called with each span when its start tag has been read.
        on_end: Called with each completed span.
    """

    def __init__(
        self,
        buffer,
        max_depth: int,
        on_start: Optional[Callable[[ElementSpan], None]] = None,
        on_end: Optional[Callable[[ElementSpan], None]] = None,
        chunk_size: int = _CHUNK,
    ):
        self.buffer = buffer
        self.max_depth = max_depth
        self.on_start = on_start
        self.on_end = on_end
        self.chunk_size = chunk_size
        self.root: Optional[ElementSpan] = None
        self._stack: List[Optional[ElementSpan]] = []
        self._parser = expat.ParserCreate(namespace_separator=_SEPARATOR)
        self._parser.buffer_text = False
        self._parser.StartElementHandler = self._start
        self._parser.EndElementHandler = self._end
        self._parser.CharacterDataHandler = self._text
        self._parser.CommentHandler = self._node
        self._parser.ProcessingInstructionHandler = self._pi
        self._parser.StartCdataSectionHandler = self._cdata
        self._parser.StartDoctypeDeclHandler = self._doctype

    # --------------------------------------------------------------------------
    # expat callbacks
    # --------------------------------------------------------------------------

    def _mark_content(self) -> None:
        if self._stack:
            parent = self._stack[-1]
            if parent is not None and parent.content_start is None:
                parent.content_start = self._parser.CurrentByteIndex

    def _start(self, name, attributes):
        self._mark_content()
        if self._stack and self._stack[-1] is not None:
            self._stack[-1].child_count += 1
        depth = len(self._stack) + 1
        if depth > self.max_depth:
            self._stack.append(None)
            return
        namespace, local = _split(name)
        span = ElementSpan(
            depth=depth,
            namespace=namespace,
            name=local,
            start=self._parser.CurrentByteIndex,
            attributes=dict(attributes),
        )
        if depth == 1:
            self.root = span
        self._stack.append(span)
        if self.on_start is not None:
            self.on_start(span)

    def _end(self, name):
        span = self._stack.pop()
        if span is None:
            return
        index = self._parser.CurrentByteIndex
        span.end = tag_end(self.buffer, index)
        if index == span.start:
            span.content_start = None
        else:
            if span.content_start is None:
                span.content_start = index
            span.content_end = index
        if self.on_end is not None:
            self.on_end(span)

    def _text(self, data):
        self._mark_content()
        if self._stack and self._stack[-1] is not None:
            self._stack[-1].text_parts.append(data)

    def _node(self, *_):
        self._mark_content()

    def _pi(self, target, data):
        self._mark_content()

    def _cdata(self):
        self._mark_content()

    def _doctype(self, *_):
        raise XmlSpanError("document type declarations are not accepted", self._parser.CurrentByteIndex)

    # --------------------------------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self._stack)

    def run(self) -> Optional[ElementSpan]:
        """
        Tokenize the whole buffer.

        Returns:
            Optional[ElementSpan]: The root element span.

        Raises:
            XmlSpanError: If the input is not well-formed.
        """
        size = len(self.buffer)
        position = 0
        try:
            while position < size:
                self._parser.Parse(self.buffer[position:position + self.chunk_size], False)
                position += self.chunk_size
            self._parser.Parse(b"", True)
        except expat.ExpatError as exc:
            raise XmlSpanError(expat.ErrorString(exc.code), self._parser.ErrorByteIndex) from exc
        return self.root

