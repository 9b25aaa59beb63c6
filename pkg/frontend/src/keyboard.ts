// Global shortcuts for the annotate screen:
//   Enter = Confirm, U = Unsure, ArrowLeft/ArrowRight = pan.
// Nothing fires while the user is typing in a field.

export interface KeyHandlers {
  confirm: () => void;
  unsure: () => void;
  panLeft: () => void;
  panRight: () => void;
}

function inEditable(target: EventTarget | null): boolean {
  return (
    target instanceof HTMLInputElement ||
    target instanceof HTMLTextAreaElement ||
    target instanceof HTMLSelectElement
  );
}

export function bindKeys(handlers: KeyHandlers): () => void {
  const onKeyDown = (event: KeyboardEvent) => {
    if (inEditable(event.target)) return;
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    switch (event.key) {
      case "Enter":
        event.preventDefault();
        handlers.confirm();
        break;
      case "u":
      case "U":
        event.preventDefault();
        handlers.unsure();
        break;
      case "ArrowLeft":
        event.preventDefault();
        handlers.panLeft();
        break;
      case "ArrowRight":
        event.preventDefault();
        handlers.panRight();
        break;
    }
  };
  document.addEventListener("keydown", onKeyDown);
  return () => document.removeEventListener("keydown", onKeyDown);
}
