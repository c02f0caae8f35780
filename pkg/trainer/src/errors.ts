export class UnknownBackbone extends Error {
  constructor(name: string) {
    super(`unknown backbone: ${name}`);
    this.name = 'UnknownBackbone';
  }
}

export class SplitNotFound extends Error {
  constructor(dir: string, detail: string) {
    super(`split directory ${dir} is unusable: ${detail}`);
    this.name = 'SplitNotFound';
  }
}

export class EmptyLog extends Error {
  constructor(path: string) {
    super(`epoch log is empty: ${path}`);
    this.name = 'EmptyLog';
  }
}
