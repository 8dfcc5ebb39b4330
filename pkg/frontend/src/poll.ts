import type { ApiClient } from "./api";
import type { Job } from "./types";

/**
 * Poll a job until it reaches a terminal state. Progress callbacks fire on
 * every sample; resolves with the final job, rejects when it failed.
 */
export function pollJob(
  api: ApiClient,
  jobId: string,
  onProgress?: (job: Job) => void,
  intervalMs = 300,
): Promise<Job> {
  return new Promise((resolve, reject) => {
    const tick = async () => {
      let job: Job;
      try {
        job = await api.job(jobId);
      } catch (err) {
        reject(err);
        return;
      }
      if (onProgress) onProgress(job);
      if (job.status === "done") {
        resolve(job);
      } else if (job.status === "failed") {
        reject(new Error(job.error || "job failed"));
      } else {
        setTimeout(tick, intervalMs);
      }
    };
    void tick();
  });
}
