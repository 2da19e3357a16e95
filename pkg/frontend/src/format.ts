// Locale formatting for payload values. Every displayed number is a service
// value passed through one of these; the UI never derives new quantities.

const MONEY = new Intl.NumberFormat("en-US", {
  minimumFractionDigits: 2,
  maximumFractionDigits: 2,
});

const COUNT = new Intl.NumberFormat("en-US", { maximumFractionDigits: 0 });

export function formatMoney(value: number): string {
  return MONEY.format(value);
}

// Explicit sign so effect directions read off the table at a glance.
export function formatSignedMoney(value: number): string {
  const s = MONEY.format(Math.abs(value));
  return value < 0 ? `-${s}` : `+${s}`;
}

export function formatCount(value: number): string {
  return COUNT.format(value);
}

export function formatPercentile(value: number): string {
  // one decimal is enough to separate mid-rank ties
  return `${value.toFixed(1)}`;
}

// Collection dates arrive as ISO yyyy-mm-dd and are shown verbatim.
export function formatDate(iso: string): string {
  return iso;
}

export function daysBetween(isoEarlier: string, isoLater: string): number {
  const a = Date.parse(isoEarlier);
  const b = Date.parse(isoLater);
  return Math.floor((b - a) / 86_400_000);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
