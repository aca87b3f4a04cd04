import type { CodeEntry, FieldError, JobCreateRequest, JobSummary, JobView } from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string | FieldError[],
  ) {
    super(typeof detail === 'string' ? detail : detail.map((e) => e.message).join('; '));
  }

  fieldErrors(): FieldError[] {
    return typeof this.detail === 'string' ? [] : this.detail;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the documented endpoints; every UI action maps to one. */
export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail: string | FieldError[];
      try {
        const body = await response.json();
        detail = body.detail ?? JSON.stringify(body);
      } catch {
        detail = response.statusText;
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async createJob(body: JobCreateRequest, providerKeys?: Map<string, string>): Promise<JobSummary> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (providerKeys && providerKeys.size > 0) {
      headers['X-Provider-Key'] = [...providerKeys.entries()]
        .map(([name, secret]) => `${name}=${secret}`)
        .join(',');
    }
    const response = await this.request('/jobs', {
      method: 'POST',
      headers,
      body: JSON.stringify(body),
    });
    return response.json();
  }

  async getJob(jobId: string): Promise<JobView> {
    return (await this.request(`/jobs/${jobId}`)).json();
  }

  async listCodes(): Promise<CodeEntry[]> {
    return (await this.request('/codes')).json();
  }

  async listProviders(): Promise<string[]> {
    const body = await (await this.request('/providers')).json();
    return body.providers;
  }

  async submitAnnotations(
    jobId: string,
    paragraphIndex: number,
    records: string,
    roundComplete = false,
  ): Promise<void> {
    await this.request(`/jobs/${jobId}/annotations`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({
        paragraph_index: paragraphIndex,
        records,
        round_complete: roundComplete,
      }),
    });
  }

  async getResultText(jobId: string): Promise<string> {
    return (await this.request(`/jobs/${jobId}/result?format=txt`)).text();
  }
}
