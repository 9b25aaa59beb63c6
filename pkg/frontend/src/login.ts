import { ApiError, login, register } from "./api";
import { clear, el } from "./dom";
import { saveSession } from "./session";

function showError(box: HTMLElement, err: unknown): void {
  box.textContent =
    err instanceof ApiError ? err.message : "server unreachable, try again";
  box.classList.remove("hidden");
}

export function renderLogin(root: HTMLElement): void {
  clear(root);
  const loginError = el("div", { class: "error hidden", id: "login-error" });
  const registerError = el("div", {
    class: "error hidden",
    id: "register-error",
  });
  const registerOk = el("div", { class: "notice hidden", id: "register-ok" });

  const username = el("input", {
    id: "login-username",
    autocomplete: "username",
  });
  const password = el("input", { id: "login-password", type: "password" });
  const loginBtn = el(
    "button",
    {
      id: "login-btn",
      class: "primary",
      onclick: async () => {
        try {
          const session = await login(username.value, password.value);
          saveSession(session);
          location.hash = "#/datasets";
        } catch (err) {
          showError(loginError, err);
        }
      },
    },
    "Sign in",
  );

  const regCode = el("input", { id: "register-code" });
  const regUsername = el("input", { id: "register-username" });
  const regPassword = el("input", { id: "register-password", type: "password" });
  const registerBtn = el(
    "button",
    {
      id: "register-btn",
      onclick: async () => {
        registerOk.classList.add("hidden");
        registerError.classList.add("hidden");
        try {
          const account = await register(
            regCode.value.trim(),
            regUsername.value.trim(),
            regPassword.value,
          );
          registerOk.textContent = `account ${account.username} created (${account.role}); sign in above`;
          registerOk.classList.remove("hidden");
        } catch (err) {
          showError(registerError, err);
        }
      },
    },
    "Register",
  );

  root.append(
    el(
      "div",
      { class: "auth-page" },
      el("h1", {}, "ECG annotation"),
      el(
        "section",
        { class: "card" },
        el("h2", {}, "Sign in"),
        el("label", {}, "Username", username),
        el("label", {}, "Password", password),
        loginBtn,
        loginError,
      ),
      el(
        "section",
        { class: "card" },
        el("h2", {}, "Register with a code"),
        el("p", { class: "muted" }, "Codes are issued by your administrator."),
        el("label", {}, "Verification code", regCode),
        el("label", {}, "Username", regUsername),
        el("label", {}, "Password", regPassword),
        registerBtn,
        registerError,
        registerOk,
      ),
    ),
  );
}
