// Word-block composition for the quiz board.  The composed text is always
// the blocks joined by single spaces; editing the raw text re-derives the
// blocks, so either representation can be edited at any time.

export class Composer {
  private words: string[] = [];

  get blocks(): readonly string[] {
    return this.words;
  }

  get text(): string {
    return this.words.join(" ");
  }

  setText(raw: string): void {
    this.words = raw.split(/\s+/).filter(Boolean);
  }

  add(word: string): void {
    const trimmed = word.trim();
    if (trimmed) this.words.push(trimmed);
  }

  removeAt(index: number): void {
    if (index >= 0 && index < this.words.length) this.words.splice(index, 1);
  }

  move(from: number, to: number): void {
    if (from === to) return;
    if (from < 0 || from >= this.words.length) return;
    const clamped = Math.max(0, Math.min(to, this.words.length - 1));
    const [word] = this.words.splice(from, 1);
    this.words.splice(clamped, 0, word);
  }

  clear(): void {
    this.words = [];
  }
}
