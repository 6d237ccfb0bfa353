export interface AffectSample {
  arousal: number;
  valence: number;
}

export interface OfferView {
  robot_points: number;
  human_points: number;
  round?: number;
}

export interface SessionEvent {
  seq: number;
  wall_time: number;
  type: 'offer' | 'mood_update' | 'phase_change' | 'terminal';
  payload: Record<string, unknown>;
}

export type Phase = 'awaiting_decision' | 'listening' | 'computing' | 'terminal';

export interface PersonalitySelection {
  time_perception: 'none' | 'patient' | 'impatient';
  conditioning: 'none' | 'excitatory' | 'inhibitory';
}

export interface CreateSessionResponse {
  id: string;
  first_offer: OfferView;
}

export const POINTS_PER_BONBON = 5;

export function bonbonsFor(points: number): number {
  return Math.floor(Math.round(points) / POINTS_PER_BONBON);
}

export function clampAffect(sample: AffectSample): AffectSample {
  const clamp = (x: number) => Math.max(-1, Math.min(1, x));
  return { arousal: clamp(sample.arousal), valence: clamp(sample.valence) };
}
