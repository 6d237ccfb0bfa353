// Session view-model. The only writer is the event stream: every rendered
// value derives from applying service events in sequence, so replaying a
// transcript reproduces any screen exactly.

import { AffectSample, OfferView, Phase, SessionEvent } from './types.js';

export interface MoodPoint {
  arousal: number;
  valence: number;
}

export interface UiSessionView {
  id: string;
  phase: Phase | 'connecting';
  status: 'active' | 'accepted' | 'aborted';
  offer: OfferView | null;
  mood: MoodPoint | null;
  offerHistory: OfferView[];
  moodHistory: MoodPoint[];
  events: SessionEvent[];
  lastSeq: number;
  rounds: number;
  pendingSamples: AffectSample[];
}

export function initialView(id: string): UiSessionView {
  return {
    id,
    phase: 'connecting',
    status: 'active',
    offer: null,
    mood: null,
    offerHistory: [],
    moodHistory: [],
    events: [],
    lastSeq: -1,
    rounds: 0,
    pendingSamples: [],
  };
}

export function applyEvent(view: UiSessionView, event: SessionEvent): UiSessionView {
  if (event.seq <= view.lastSeq) {
    return view; // duplicate from a resumed stream
  }
  const next: UiSessionView = {
    ...view,
    events: [...view.events, event],
    lastSeq: event.seq,
  };
  switch (event.type) {
    case 'offer': {
      const offer = event.payload as unknown as OfferView;
      next.offer = offer;
      next.offerHistory = [...view.offerHistory, offer];
      break;
    }
    case 'mood_update': {
      const mood = {
        arousal: event.payload['arousal'] as number,
        valence: event.payload['valence'] as number,
      };
      next.mood = mood;
      next.moodHistory = [...view.moodHistory, mood];
      break;
    }
    case 'phase_change':
      next.phase = event.payload['phase'] as Phase;
      break;
    case 'terminal': {
      next.phase = 'terminal';
      next.status = event.payload['status'] as 'accepted' | 'aborted';
      next.rounds = (event.payload['rounds'] as number) ?? view.rounds;
      break;
    }
  }
  return next;
}

export function replay(id: string, events: SessionEvent[]): UiSessionView {
  return events.reduce(applyEvent, initialView(id));
}

export function canDecide(view: UiSessionView): boolean {
  return view.phase === 'awaiting_decision';
}

export function canExpress(view: UiSessionView): boolean {
  return view.phase === 'listening';
}
