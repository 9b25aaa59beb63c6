// Session persistence: survives reloads within a tab, dies with it.

import { setToken } from "./api";
import type { SessionInfo } from "./types";

const KEY = "ecganno.session";

export interface StoredSession {
  token: string;
  user_id: string;
  username: string;
  role: string;
}

export function saveSession(info: SessionInfo): void {
  const stored: StoredSession = {
    token: info.token,
    user_id: info.user_id,
    username: info.username,
    role: info.role,
  };
  sessionStorage.setItem(KEY, JSON.stringify(stored));
  setToken(info.token);
}

export function loadSession(): StoredSession | null {
  const raw = sessionStorage.getItem(KEY);
  if (!raw) return null;
  try {
    const stored = JSON.parse(raw) as StoredSession;
    setToken(stored.token);
    return stored;
  } catch {
    sessionStorage.removeItem(KEY);
    return null;
  }
}

export function clearSession(): void {
  sessionStorage.removeItem(KEY);
  setToken(null);
}
