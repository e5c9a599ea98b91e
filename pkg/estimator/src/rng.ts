/**
 * Deterministic PRNG (SplitMix64) so every pipeline stage is reproducible
 * from an integer seed, independent of platform and of Math.random.
 */
export class Rng {
  private state: bigint;

  constructor(seed: number | bigint) {
    this.state = BigInt.asUintN(64, BigInt(seed));
  }

  /** Next raw 64-bit value. */
  nextUint64(): bigint {
    this.state = BigInt.asUintN(64, this.state + 0x9e3779b97f4a7c15n);
    let z = this.state;
    z = BigInt.asUintN(64, (z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n);
    z = BigInt.asUintN(64, (z ^ (z >> 27n)) * 0x94d049bb133111ebn);
    return z ^ (z >> 31n);
  }

  /** Uniform float in [0, 1). */
  next(): number {
    return Number(this.nextUint64() >> 11n) / 2 ** 53;
  }

  /** Uniform integer in [0, bound). */
  nextInt(bound: number): number {
    if (bound <= 0) throw new RangeError(`bound must be positive: ${bound}`);
    return Math.floor(this.next() * bound);
  }

  /** Standard normal via Box-Muller. */
  nextGaussian(): number {
    const u = Math.max(this.next(), Number.MIN_VALUE);
    const v = this.next();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  /** In-place Fisher-Yates shuffle. */
  shuffle<T>(items: T[]): T[] {
    for (let i = items.length - 1; i > 0; i--) {
      const j = this.nextInt(i + 1);
      [items[i], items[j]] = [items[j], items[i]];
    }
    return items;
  }

  /** Sample `count` distinct items, order-stable under the seed. */
  sample<T>(items: readonly T[], count: number): T[] {
    if (count < 0 || count > items.length) {
      throw new RangeError(`cannot sample ${count} of ${items.length}`);
    }
    return this.shuffle([...items]).slice(0, count);
  }
}
