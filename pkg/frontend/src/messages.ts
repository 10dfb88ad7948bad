// Interface strings live here, keyed by locale.  The English catalog is the
// complete reference; other locales may cover any subset and fall back to
// English key by key.

const en = {
  "app.title": "Hexalect",
  "nav.home": "Back to the map",
  "busy": "Waiting for the server…",
  "error.api": "The server could not be reached.",
  "error.retry": "Try again",

  "entry.title": "Pick a language family",
  "entry.hint": "Each pin is a family of dialects. Choose one to start playing.",

  "choice.title": "{family}",
  "choice.quiz": "I speak a dialect",
  "choice.quiz_hint": "Rewrite standard sentences the way you would say them.",
  "choice.match": "Let me guess",
  "choice.match_hint": "Guess which part of the map a sentence comes from.",

  "tier.EASY": "Easy",
  "tier.NORMAL": "Normal",
  "tier.HARD": "Hard",

  "quiz.title": "Rewrite it your way",
  "quiz.badge_label": "Your level",
  "quiz.difficulty_label": "Difficulty",
  "quiz.sentence_label": "Standard sentence",
  "quiz.item_tier": "This sentence: {tier}",
  "quiz.input_label": "Your dialect version",
  "quiz.input_placeholder": "Write the sentence the way you say it…",
  "quiz.blocks_label": "Word blocks — drag to reorder, click × to remove",
  "quiz.search_placeholder": "Find word blocks…",
  "quiz.add_block": "Add “{word}”",
  "quiz.submit": "Submit",
  "quiz.map_title": "Where your sentence seems to be from",
  "quiz.legend_title": "Prediction",
  "quiz.legend_tooltip": "How strongly your sentence resembles this dialect. Higher means a closer match.",

  "review.question": "Does this prediction match your dialect?",
  "review.yes": "Yes, that's right",
  "review.no": "No, let me fix it",
  "review.pick_title": "Which dialect is it?",
  "review.affiliation": "part of {name}",
  "review.none_of_above": "None of the above",
  "review.new_name_label": "Name the dialect",
  "review.new_name_placeholder": "What is this dialect called?",
  "review.editor_title": "Where is it spoken?",
  "review.editor_help": "Draw a loop around the area, or click single hexes to add and remove them.",
  "review.onboarding_title": "Marking the area",
  "review.onboarding_body": "Press and drag to draw a loop — every hex inside it is selected. Click a hex to toggle just that one.",
  "review.onboarding_dismiss": "Got it",
  "review.out_of_bounds": "That hex is outside this family's map.",
  "review.save": "Save correction",
  "review.cancel": "Never mind",
  "review.unsaved_confirm": "You have unsaved map edits. Leave anyway?",
  "review.saved": "Thanks — your correction was recorded.",

  "match.title": "Place the sentence",
  "match.item_counter": "Sentence {n} of {total}",
  "match.instructions": "Tap every district where you think people say it this way, then submit.",
  "match.submit": "Submit answer",
  "match.confirm_empty": "You haven't selected any district. Submit an empty answer?",
  "match.score": "Overlap score: {score}",
  "match.reference_label": "The recorded area is outlined.",
  "match.agree": "Looks right",
  "match.disagree": "I disagree",
  "match.correction_title": "Mark the districts you believe are correct, then send.",
  "match.correction_submit": "Send correction",
  "match.corrected": "Your correction was recorded.",
  "match.next": "Next sentence",
  "match.summary_title": "Round complete",
  "match.summary_item": "Sentence {n}: {score}",
  "match.summary_mean": "Average overlap: {score}",
  "match.play_again": "Play again",
} as const;

export type MsgKey = keyof typeof en;

// Deliberately partial: exercises the per-key fallback to English.
const de: Partial<Record<MsgKey, string>> = {
  "entry.title": "Wähle eine Sprachfamilie",
  "choice.quiz": "Ich spreche einen Dialekt",
  "choice.match": "Lass mich raten",
  "quiz.submit": "Absenden",
  "review.yes": "Ja, das stimmt",
  "review.no": "Nein, ich korrigiere",
  "tier.EASY": "Leicht",
  "tier.NORMAL": "Mittel",
  "tier.HARD": "Schwer",
};

const catalogs: Record<string, Partial<Record<MsgKey, string>>> = { en, de };

let current = "en";

export function setLocale(locale: string): void {
  current = locale;
}

export function getLocale(): string {
  return current;
}

export function locales(): string[] {
  return Object.keys(catalogs);
}

export function t(key: MsgKey, vars?: Record<string, string | number>): string {
  const raw = catalogs[current]?.[key] ?? en[key];
  if (!vars) return raw;
  return raw.replace(/\{(\w+)\}/g, (match, name: string) =>
    name in vars ? String(vars[name]) : match,
  );
}

export const EN_KEYS = Object.keys(en) as MsgKey[];
