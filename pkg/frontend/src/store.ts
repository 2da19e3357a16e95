import { ExplainParams, ServiceClient } from "./api";
import {
  Banner,
  FocalSlot,
  ViewModel,
  bannerFor,
  beginExplanation,
  beginHouseholds,
  dismissBanner,
  failFocalRequest,
  failHouseholds,
  initialViewModel,
  receiveHistogram,
  receiveHouseholds,
  receiveRadar,
  receiveReport,
  selectFocal,
  toggleRadarSeries,
} from "./state";

export type Listener = (vm: ViewModel) => void;

/**
 * Single render loop around the pure transitions: every committed change
 * notifies the listener with the new ViewModel. Responses resolve against the
 * generation they were issued under, so a superseded focal's payloads and
 * errors fall on the floor.
 */
export class Store {
  private vm = initialViewModel();

  constructor(
    private readonly client: ServiceClient,
    private readonly listener: Listener,
  ) {}

  get state(): ViewModel {
    return this.vm;
  }

  private commit(next: ViewModel): void {
    if (next === this.vm) return;
    this.vm = next;
    this.listener(next);
  }

  async loadHouseholds(offset?: number, limit?: number): Promise<void> {
    this.commit(beginHouseholds(this.vm));
    try {
      const page = await this.client.listHouseholds(offset, limit);
      this.commit(receiveHouseholds(this.vm, page));
    } catch (err) {
      this.commit(failHouseholds(this.vm, bannerFor(null, err)));
    }
  }

  /** Focus a household and fetch its report, histogram placement, and radar. */
  async selectHousehold(householdId: string): Promise<void> {
    const next = selectFocal(this.vm, householdId);
    const generation = next.generation;
    this.commit(next);
    await Promise.all([
      this.fetchReport(householdId, generation, {}),
      this.fetchHistogram(householdId, generation),
      this.fetchRadar(householdId, generation),
    ]);
  }

  /** Re-run the explanation for the current focal; one in flight at a time. */
  async runExplanation(params: ExplainParams): Promise<void> {
    const householdId = this.vm.focalId;
    if (householdId === null || this.vm.pending.report) return;
    const generation = this.vm.generation;
    this.commit(beginExplanation(this.vm));
    await this.fetchReport(householdId, generation, params);
  }

  toggleSeries(): void {
    this.commit(toggleRadarSeries(this.vm));
  }

  dismiss(index: number): void {
    this.commit(dismissBanner(this.vm, index));
  }

  // Await the payload before building the transition: this.vm must be read
  // after the response lands or concurrent commits would be lost.

  private async fetchReport(householdId: string, generation: number, params: ExplainParams): Promise<void> {
    try {
      const report = await this.client.explain(householdId, params);
      this.commit(receiveReport(this.vm, generation, report));
    } catch (err) {
      this.fail(generation, "report", bannerFor(householdId, err));
    }
  }

  private async fetchHistogram(householdId: string, generation: number): Promise<void> {
    try {
      const payload = await this.client.incomeDistribution(householdId);
      this.commit(receiveHistogram(this.vm, generation, payload));
    } catch (err) {
      this.fail(generation, "histogram", bannerFor(householdId, err));
    }
  }

  private async fetchRadar(householdId: string, generation: number): Promise<void> {
    try {
      const payload = await this.client.radar(householdId);
      this.commit(receiveRadar(this.vm, generation, payload));
    } catch (err) {
      this.fail(generation, "radar", bannerFor(householdId, err));
    }
  }

  private fail(generation: number, slot: FocalSlot, banner: Banner): void {
    this.commit(failFocalRequest(this.vm, generation, slot, banner));
  }
}
