// Client-side validation of event-token texts. Mirrors the backend rules:
// three comma-separated lowercase snake_case fields, no whitespace; the
// reserved sequence markers are never valid input events.

const IDENTIFIER = /^[a-z][a-z0-9_]*$/;
const RESERVED = new Set(["<s>", "</s>", "<unk>"]);

export interface TokenParts {
  device: string;
  attribute: string;
  action: string;
}

export type TokenCheck =
  | { ok: true; token: TokenParts }
  | { ok: false; error: string };

export function checkToken(text: string): TokenCheck {
  const trimmed = text.trim();
  if (trimmed === "") {
    return { ok: false, error: "empty token" };
  }
  if (RESERVED.has(trimmed)) {
    return { ok: false, error: `${trimmed} is a reserved marker, not an event` };
  }
  const fields = trimmed.split(",");
  if (fields.length !== 3) {
    return {
      ok: false,
      error: `expected device,attribute,action (3 fields), got ${fields.length}`,
    };
  }
  for (const field of fields) {
    if (!IDENTIFIER.test(field)) {
      return { ok: false, error: `"${field}" is not a lowercase identifier` };
    }
  }
  const [device, attribute, action] = fields;
  return { ok: true, token: { device, attribute, action } };
}

export function formatToken(parts: TokenParts): string {
  return `${parts.device},${parts.attribute},${parts.action}`;
}

export function entityIdFor(tokenText: string): string {
  const check = checkToken(tokenText);
  if (!check.ok) {
    return tokenText;
  }
  return `${check.token.device}_${check.token.attribute}`;
}
