"""
The HTTP surface: one OAI-PMH repository per tape, one OpenURL resolver per
ARC file and the Identifier Locator.

    GET|POST /oai/<tape-uuid>?verb=...
    GET      /openurl/<arc-uuid>?url_ver=Z39.88-2004&rft_id=...
    GET      /locate?content_id=...
    POST     /mounts/refresh
"""

import time
from typing import List, Optional, Tuple
from urllib.parse import parse_qsl

import orjson
from fastapi import FastAPI, Request, Response
from starlette.concurrency import run_in_threadpool

from config import Config
from lib.datestamp import Clock, utc_now
from lib.errors import KeyNotFoundError
from lib.logger import access_logger, logger
from locator.identifier_locator import IdentifierLocator

from .mount import StoreMount
from .oaipmh import OaiSettings, handle_oai
from .openurl import handle_openurl

OAI_MEDIA_TYPE = "text/xml"
JSON_MEDIA_TYPE = "application/json"


def oai_settings(config: Config, clock: Clock = utc_now) -> OaiSettings:
    return OaiSettings(
        oai_base_template=config.oai_template,
        page_size=config.page_size,
        metadata_prefix=config.metadata_prefix,
        metadata_namespace=config.metadata_namespace,
        metadata_schema=config.metadata_schema,
        repository_name=config.repository_name,
        admin_email=config.admin_email,
        clock=clock,
    )


def locate_document(locator: IdentifierLocator, content_id: str) -> bytes:
    """
    JSON list of every version of an object, oldest first.
    """
    return orjson.dumps({
        "content_id": content_id,
        "versions": [version.to_json_dict() for version in locator.resolve_versions(content_id)],
    })


def _not_found(message: str) -> Response:
    return Response(content=message + "\n", status_code=404, media_type="text/plain")


def create_app(config: Config, mount: Optional[StoreMount] = None, locator: Optional[IdentifierLocator] = None,
               clock: Clock = utc_now) -> FastAPI:
    """
    Build the service for one store root and mount it.

    Args:
        config (Config): Store root, templates, page size and OpenURL strictness.
        mount (Optional[StoreMount]): Defaults to a mount of `config.store`.
        locator (Optional[IdentifierLocator]): Defaults to the store's locator log.
        clock (Clock): Source of OAI-PMH response dates.
    """
    mount = mount or StoreMount(config.store)
    locator = locator or IdentifierLocator(config.store.locator_log, config.oai_template)
    settings = oai_settings(config, clock)
    mount.refresh()

    app = FastAPI(title="xmltape-repository", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.mount = mount
    app.state.locator = locator

    @app.middleware("http")
    async def log_access(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        access_logger.info(
            "%s %s %s %d %.1fms",
            request.client.host if request.client else "-",
            request.method,
            request.url.path + (f"?{request.url.query}" if request.url.query else ""),
            response.status_code,
            (time.perf_counter() - started) * 1000,
        )
        return response

    @app.api_route("/oai/{tape_uuid}", methods=["GET", "POST"])
    async def oai(tape_uuid: str, request: Request) -> Response:
        try:
            tape = mount.tape(tape_uuid)
        except KeyNotFoundError as exc:
            return _not_found(str(exc))
        params: List[Tuple[str, str]] = list(request.query_params.multi_items())
        if request.method == "POST":
            body = await request.body()
            params = parse_qsl(body.decode("utf-8", "replace"), keep_blank_values=True)
        document = await run_in_threadpool(handle_oai, tape, params, settings)
        return Response(content=document, media_type=OAI_MEDIA_TYPE)

    @app.get("/openurl/{arc_uuid}")
    def openurl(arc_uuid: str, request: Request) -> Response:
        try:
            arc = mount.arc(arc_uuid)
        except KeyNotFoundError as exc:
            return _not_found(str(exc))
        result = handle_openurl(arc, list(request.query_params.multi_items()), strict=config.strict_openurl)
        return Response(content=result.body, status_code=result.status, media_type=result.media_type,
                        headers=result.headers)

    @app.get("/locate")
    def locate(request: Request) -> Response:
        content_id = request.query_params.get("content_id")
        if not content_id:
            return Response(content=orjson.dumps({"error": "content_id is required"}), status_code=400,
                            media_type=JSON_MEDIA_TYPE)
        return Response(content=locate_document(locator, content_id), media_type=JSON_MEDIA_TYPE)

    @app.post("/mounts/refresh")
    def refresh() -> Response:
        snapshot = mount.refresh()
        versions = locator.reload()
        logger.info("Refreshed mounts on request")
        return Response(
            content=orjson.dumps({"tapes": len(snapshot.tapes), "arcs": len(snapshot.arcs), "versions": versions}),
            media_type=JSON_MEDIA_TYPE,
        )

    return app
