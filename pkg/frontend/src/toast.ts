/** Transient failure notice with a retry hook. */

export function showToast(
  root: HTMLElement,
  message: string,
  onRetry?: () => void,
): HTMLElement {
  const toast = document.createElement("div");
  toast.className = "toast";
  toast.setAttribute("role", "alert");

  const text = document.createElement("span");
  text.textContent = message;
  toast.appendChild(text);

  if (onRetry) {
    const retry = document.createElement("button");
    retry.className = "toast-retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      toast.remove();
      onRetry();
    });
    toast.appendChild(retry);
  }

  const dismiss = document.createElement("button");
  dismiss.className = "toast-dismiss";
  dismiss.textContent = "Dismiss";
  dismiss.addEventListener("click", () => toast.remove());
  toast.appendChild(dismiss);

  root.appendChild(toast);
  return toast;
}
