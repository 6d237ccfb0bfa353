"""Live negotiation sessions over HTTP: a human respondent (via the browser
client) plays against a configured agent. Sessions are in-memory state
machines with JSONL write-through and a server-sent-events stream that
mirrors the event log exactly.

Phase machine per session:
    AwaitingDecision --reject--> Listening --window closed--> Computing
    Computing --new offer--> AwaitingDecision
    AwaitingDecision --accept--> Terminal(accepted)
    reject count reaching the limit --> Terminal(aborted)
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from pathlib import Path
from typing import Iterator

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from .affect import ArousalValence, Conditioning, Offer, PersonalityConfig, TimePerception
from .config import HarnessConfig
from .cores import build_cores, default_conditioning_frames
from .gamma import GammaGwrNetwork
from .mood import MoodEngine, MoodError, PersonalityMood
from .policy import DdpgAgent, load_policy
from .ultimatum import state_vector

PHASE_AWAITING = "awaiting_decision"
PHASE_LISTENING = "listening"
PHASE_COMPUTING = "computing"
PHASE_TERMINAL = "terminal"


class CreateSessionBody(BaseModel):
    personality: dict = Field(default_factory=dict)
    policy_id: str
    seed: int = 0


class DecisionBody(BaseModel):
    action: str


class AffectFrameBody(BaseModel):
    arousal: float
    valence: float


class AffectBody(BaseModel):
    frames: list[AffectFrameBody]


def _parse_personality(raw: dict) -> PersonalityConfig:
    try:
        tp = TimePerception(raw.get("time_perception", "none"))
        cond = Conditioning(raw.get("conditioning", "none"))
        custom_tau = raw.get("custom_tau")
        return PersonalityConfig(time_perception=tp, conditioning=cond,
                                 custom_tau=custom_tau)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=f"invalid personality: {exc}")


class Session:
    """One negotiation; single-writer via its lock, broadcast via events."""

    def __init__(self, session_id: str, personality: PersonalityConfig,
                 policy_id: str, agent: DdpgAgent, cfg: HarnessConfig,
                 seed: int, log_path: Path | None) -> None:
        self.id = session_id
        self.personality = personality
        self.policy_id = policy_id
        self.agent = agent
        self.cfg = cfg
        self.seed = seed
        self.lock = threading.Lock()
        self.changed = threading.Condition(self.lock)
        self.events: list[dict] = []
        self.log_path = log_path

        self.rng = np.random.default_rng([seed])
        frames = None
        if personality.conditioning is not Conditioning.NONE:
            frames = default_conditioning_frames(personality.conditioning, seed,
                                                 n=cfg.conditioning_stimulus_count)
        time_core, social_core = build_cores(personality, seed,
                                             time_steps=cfg.time_core_steps,
                                             conditioning_frames=frames)
        memory = GammaGwrNetwork(dim=2, params=cfg.memory_params()) if cfg.memory_enabled else None
        self.mood = PersonalityMood(
            engine=MoodEngine(params=cfg.mood_params(), memory_repeat=cfg.memory_repeat),
            time_core=time_core, social_core=social_core, memory=memory,
            social_bmus=cfg.social_bmus, time_bmus=cfg.time_bmus)

        game = cfg.game_config()
        h0 = self.rng.uniform(game.first_offer_human_min, game.first_offer_human_max)
        self.offer = Offer.from_human_points(h0)
        self.round = 0
        self.phase = PHASE_AWAITING
        self.status = "active"
        self.history: list[dict] = []
        self.window_frames: list[ArousalValence] = []
        with self.lock:
            self._emit("offer", self._offer_payload())
            self._emit("phase_change", {"phase": self.phase})

    # -- event plumbing ---------------------------------------------------

    def _offer_payload(self) -> dict:
        return {"robot_points": self.offer.robot_points,
                "human_points": self.offer.human_points,
                "round": self.round}

    def _emit(self, etype: str, payload: dict) -> None:
        event = {"seq": len(self.events), "wall_time": time.time(),
                 "type": etype, "payload": payload}
        self.events.append(event)
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
        self.changed.notify_all()

    def view(self) -> dict:
        mood = self.mood.current_mood()
        return {
            "id": self.id,
            "policy_id": self.policy_id,
            "personality": {
                "time_perception": self.personality.time_perception.value,
                "conditioning": self.personality.conditioning.value,
            },
            "phase": self.phase,
            "status": self.status,
            "round": self.round,
            "offer": {"robot_points": self.offer.robot_points,
                      "human_points": self.offer.human_points},
            "mood": {"arousal": mood.arousal, "valence": mood.valence},
            "history": self.history,
            "seq": len(self.events) - 1,
            "listening_remaining": (self.cfg.listening_window_ticks - len(self.window_frames)
                                    if self.phase == PHASE_LISTENING else 0),
        }

    def _require_phase(self, phase: str) -> None:
        if self.phase != phase:
            raise HTTPException(status_code=409,
                                detail=f"expected phase {phase}, session is {self.phase}")

    def _set_phase(self, phase: str) -> None:
        self.phase = phase
        self._emit("phase_change", {"phase": phase})

    # -- transitions --------------------------------------------------------

    def decide(self, action: str) -> dict:
        with self.lock:
            self._require_phase(PHASE_AWAITING)
            mood = self.mood.current_mood()
            if action == "accept":
                self.history.append({"offer": self._offer_payload(),
                                     "decision": "accept",
                                     "mood": {"arousal": mood.arousal, "valence": mood.valence}})
                self.status = "accepted"
                self._set_phase(PHASE_TERMINAL)
                self._emit("terminal", {"status": self.status,
                                        "final_offer": self._offer_payload(),
                                        "rounds": len(self.history)})
            elif action == "reject":
                self.history.append({"offer": self._offer_payload(),
                                     "decision": "reject",
                                     "mood": {"arousal": mood.arousal, "valence": mood.valence}})
                self.round += 1
                if self.round >= self.cfg.max_rejections:
                    self.status = "aborted"
                    self._set_phase(PHASE_TERMINAL)
                    self._emit("terminal", {"status": self.status,
                                            "final_offer": self._offer_payload(),
                                            "rounds": len(self.history)})
                else:
                    self.window_frames = []
                    self._set_phase(PHASE_LISTENING)
            else:
                raise HTTPException(status_code=422, detail=f"unknown action {action!r}")
            return self.view()

    def add_affect(self, frames: list[AffectFrameBody]) -> dict:
        with self.lock:
            self._require_phase(PHASE_LISTENING)
            for f in frames:
                if not (-1.0 <= f.arousal <= 1.0 and -1.0 <= f.valence <= 1.0):
                    raise HTTPException(status_code=422,
                                        detail=f"affect out of range: ({f.arousal}, {f.valence})")
            remaining = self.cfg.listening_window_ticks - len(self.window_frames)
            accepted = 0
            for f in frames[:max(0, remaining)]:
                point = ArousalValence(f.arousal, f.valence)
                self.window_frames.append(point)
                snap = self.mood.observe([point])
                self._emit("mood_update", {"arousal": snap.mean.arousal,
                                           "valence": snap.mean.valence,
                                           "neuron_count": snap.neuron_count})
                accepted += 1
            if len(self.window_frames) >= self.cfg.listening_window_ticks:
                self._compute_update()
            return {"accepted": accepted, "remaining": max(0, remaining - accepted)}

    def close_window(self) -> dict:
        with self.lock:
            self._require_phase(PHASE_LISTENING)
            self._compute_update()
            return self.view()

    def _compute_update(self) -> None:
        """Listening window closed: one memory/core tick (perception absent),
        then the policy moves the offer. Caller holds the lock."""
        self._set_phase(PHASE_COMPUTING)
        try:
            snap = self.mood.observe(None)
            self._emit("mood_update", {"arousal": snap.mean.arousal,
                                       "valence": snap.mean.valence,
                                       "neuron_count": snap.neuron_count})
        except MoodError:
            pass  # nothing to tick yet (no memory, no cores): mood unchanged
        mood = self.mood.current_mood()
        state = state_vector(mood, self.offer)
        action = self.agent.act(state)
        game = self.cfg.game_config()
        new_h = self.offer.human_points + action * game.action_scale
        self.offer = Offer.from_human_points(min(max(new_h, 0.0), 100.0))
        self.window_frames = []
        self._emit("offer", self._offer_payload())
        self._set_phase(PHASE_AWAITING)

    def stream(self, since: int) -> Iterator[str]:
        """Replay events after `since`, then follow live until terminal."""
        cursor = since + 1
        while True:
            with self.lock:
                while cursor >= len(self.events) and self.phase != PHASE_TERMINAL:
                    self.changed.wait(timeout=30.0)
                batch = self.events[cursor:]
                cursor = len(self.events)
                terminal_seen = any(e["type"] == "terminal" for e in batch) \
                    or (self.phase == PHASE_TERMINAL and not batch)
            for event in batch:
                yield (f"id: {event['seq']}\n"
                       f"event: {event['type']}\n"
                       f"data: {json.dumps(event, sort_keys=True)}\n\n")
            if terminal_seen:
                return


def create_app(policies_dir: str, config: HarnessConfig | None = None,
               log_dir: str | None = None) -> FastAPI:
    cfg = config if config is not None else HarnessConfig()
    app = FastAPI(title="affectnego session service")
    policies: dict[str, DdpgAgent] = {}
    for path in sorted(Path(policies_dir).glob("*.json")):
        policies[path.stem] = load_policy(str(path))
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()
    log_root = Path(log_dir) if log_dir else None
    if log_root is not None:
        log_root.mkdir(parents=True, exist_ok=True)

    def _get(session_id: str) -> Session:
        with sessions_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.get("/api/policies")
    def list_policies() -> dict:
        return {"policies": sorted(policies)}

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        if body.policy_id not in policies:
            raise HTTPException(status_code=404, detail=f"unknown policy {body.policy_id!r}")
        personality = _parse_personality(body.personality)
        session_id = secrets.token_hex(8)
        log_path = (log_root / f"{session_id}.jsonl") if log_root is not None else None
        session = Session(session_id, personality, body.policy_id,
                          policies[body.policy_id], cfg, body.seed, log_path)
        with sessions_lock:
            sessions[session_id] = session
        return {"id": session_id,
                "first_offer": {"robot_points": session.offer.robot_points,
                                "human_points": session.offer.human_points},
                "view": session.view()}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = _get(session_id)
        with session.lock:
            return session.view()

    @app.post("/api/sessions/{session_id}/decision")
    def post_decision(session_id: str, body: DecisionBody) -> dict:
        return _get(session_id).decide(body.action)

    @app.post("/api/sessions/{session_id}/affect")
    def post_affect(session_id: str, body: AffectBody) -> dict:
        return _get(session_id).add_affect(body.frames)

    @app.post("/api/sessions/{session_id}/next")
    def post_next(session_id: str) -> dict:
        return _get(session_id).close_window()

    @app.get("/api/sessions/{session_id}/stream")
    def stream(session_id: str, request: Request, since: int = -1) -> StreamingResponse:
        session = _get(session_id)
        last_id = request.headers.get("last-event-id")
        if last_id is not None:
            try:
                since = int(last_id)
            except ValueError:
                raise HTTPException(status_code=422, detail="bad Last-Event-ID")
        return StreamingResponse(session.stream(since), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    @app.get("/api/sessions/{session_id}/log")
    def get_log(session_id: str) -> JSONResponse:
        session = _get(session_id)
        with session.lock:
            return JSONResponse({"events": session.events})

    return app
