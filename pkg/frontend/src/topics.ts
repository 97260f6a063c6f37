// Client-side topic membership: enough to decide whether a message
// belongs under a selected trend without asking the server again.
// Only topics the server surfaced are ever matched, so a tokenizer
// that finds hashtags and words is sufficient.

const HASHTAG_RE = /#\w+/g;
const WORD_RE = /[^\W\d_]+/gu;

export function messageMentions(text: string, topic: string): boolean {
  const key = topic.toLowerCase();
  if (key.startsWith("#")) {
    for (const m of text.matchAll(HASHTAG_RE)) {
      if (m[0].toLowerCase() === key) return true;
    }
    return false;
  }
  const stripped = text.replace(HASHTAG_RE, " ");
  for (const m of stripped.matchAll(WORD_RE)) {
    if (m[0].toLowerCase() === key) return true;
  }
  return false;
}
