// Copyright 2026 The dcsurrogate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/sim_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <set>
#include <unordered_map>

namespace dcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Event {
    double time;
    SimEventKind kind;
    std::int64_t job_index;
    std::uint64_t seq;
    std::size_t payload;  // job slot or transfer slot

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
        if (job_index != o.job_index) return job_index > o.job_index;
        return seq > o.seq;
    }
};

struct Resource {
    double capacity = 0.0;  // <= 0 means unconstrained
    int active = 0;
};

struct Transfer {
    std::size_t job = 0;
    bool output = false;
    std::vector<std::size_t> resources;
    double size = 0.0;
    double remaining = 0.0;
    double rate = 0.0;
    double finish = kInf;
    double moved = 0.0;  // audit: integral of rate over time
    bool active = false;
};

struct WorkerState {
    std::size_t node = 0;
    int cores = 0;
    int free_cores = 0;
    double core_speed = 0.0;
    std::set<std::size_t> running;
};

struct JobState {
    std::size_t worker = 0;
    int pending_inputs = 0;
    double start = 0.0;
    double input_done = 0.0;
    double compute_done = 0.0;
    double compute_time = 0.0;
    std::string output_location;
};

class Engine {
public:
    Engine(const PlatformSpec& platform, const std::vector<JobSpec>& jobs, const DatasetSpec& dataset,
           const SimOptions& options)
        : platform_(platform), options_(options) {
        // Jobs are processed in job_index order regardless of input order.
        jobs_.reserve(jobs.size());
        for (const auto& j : jobs) jobs_.push_back(&j);
        std::stable_sort(jobs_.begin(), jobs_.end(),
                         [](const JobSpec* a, const JobSpec* b) { return a->job_index < b->job_index; });
        for (std::size_t i = 1; i < jobs_.size(); ++i)
            if (jobs_[i]->job_index == jobs_[i - 1]->job_index)
                fail(ErrorCategory::argument, "duplicate job_index " + std::to_string(jobs_[i]->job_index));

        const std::size_t n_links = platform.links.size();
        const std::size_t n_nodes = platform.nodes.size();
        resources_.resize(n_links + 2 * n_nodes);
        for (std::size_t l = 0; l < n_links; ++l) resources_[l].capacity = platform.links[l].bandwidth;
        for (std::size_t n = 0; n < n_nodes; ++n) {
            resources_[n_links + n].capacity = platform.nodes[n].disk_read_bw;
            resources_[n_links + n_nodes + n].capacity = platform.nodes[n].disk_write_bw;
        }

        std::vector<std::size_t> worker_nodes;
        for (std::size_t n = 0; n < n_nodes; ++n)
            if (platform.nodes[n].role == NodeRole::worker) worker_nodes.push_back(n);
        std::sort(worker_nodes.begin(), worker_nodes.end(), [&](std::size_t a, std::size_t b) {
            return platform.nodes[a].id < platform.nodes[b].id;
        });
        for (auto n : worker_nodes) {
            const auto& spec = platform.nodes[n];
            workers_.push_back(WorkerState{n, spec.cores, spec.cores, spec.core_speed, {}});
        }

        std::string default_storage;
        for (const auto* s : platform.storage_nodes())
            if (default_storage.empty() || s->id < default_storage) default_storage = s->id;

        for (const auto& f : dataset.files) files_.emplace(f.file_id, &f);

        state_.resize(jobs_.size());
        records_.resize(jobs_.size());
        for (std::size_t j = 0; j < jobs_.size(); ++j) {
            const JobSpec& job = *jobs_[j];
            if (!(job.flops > 0.0) || !std::isfinite(job.flops))
                fail(ErrorCategory::argument, "job " + std::to_string(job.job_index) + ": flops must be positive");
            if (!(job.submission_time >= 0.0) || !std::isfinite(job.submission_time))
                fail(ErrorCategory::argument,
                     "job " + std::to_string(job.job_index) + ": submission_time must be non-negative");
            for (const auto& id : job.input_files) {
                auto it = files_.find(id);
                if (it == files_.end())
                    fail(ErrorCategory::simulation,
                         "job " + std::to_string(job.job_index) + ": missing input file '" + id + "'");
                if (!platform.find_node(it->second->location))
                    fail(ErrorCategory::simulation,
                         "file '" + id + "' is located on unknown node '" + it->second->location + "'");
            }
            state_[j].output_location =
                job.input_files.empty() ? default_storage : files_.at(job.input_files.front())->location;
        }
        if (!jobs_.empty() && workers_.empty()) fail(ErrorCategory::simulation, "platform has no worker nodes");
    }

    std::vector<TraceRecord> run() {
        for (std::size_t j = 0; j < jobs_.size(); ++j)
            push(jobs_[j]->submission_time, SimEventKind::job_submitted, j);

        while (!events_.empty() || !active_.empty()) {
            const double t_transfer = earliest_finish();
            const bool take_event =
                !events_.empty() &&
                (events_.top().time < t_transfer ||
                 (events_.top().time == t_transfer &&
                  static_cast<int>(events_.top().kind) < static_cast<int>(SimEventKind::transfer_done)));
            if (take_event) {
                Event ev = events_.top();
                events_.pop();
                advance(ev.time);
                handle(ev);
            } else {
                advance(t_transfer);
                complete_transfers(t_transfer);
            }
            dispatch();
            if (options_.audit) audit_cores();
            if (stats_) ++stats_->events;
        }

        std::vector<TraceRecord> trace;
        trace.reserve(jobs_.size());
        for (std::size_t j = 0; j < jobs_.size(); ++j) trace.push_back(std::move(records_[j]));
        return trace;
    }

    void set_stats(SimStats* stats) { stats_ = stats; }

private:
    void push(double time, SimEventKind kind, std::size_t payload, std::int64_t job_index = -1) {
        if (job_index < 0) job_index = jobs_[payload]->job_index;
        events_.push(Event{time, kind, job_index, seq_++, payload});
    }

    double earliest_finish() const {
        double t = kInf;
        for (auto id : active_) t = std::min(t, transfers_[id].finish);
        return t;
    }

    void advance(double t) {
        const double dt = t - now_;
        if (dt > 0.0) {
            for (auto id : active_) {
                Transfer& tr = transfers_[id];
                if (std::isinf(tr.rate)) continue;
                tr.remaining -= tr.rate * dt;
                tr.moved += tr.rate * dt;
            }
        }
        now_ = std::max(now_, t);
    }

    void recompute_rates() {
        for (auto id : active_) {
            Transfer& tr = transfers_[id];
            double rate = kInf;
            for (auto r : tr.resources) {
                const Resource& res = resources_[r];
                if (res.capacity > 0.0) rate = std::min(rate, res.capacity / res.active);
            }
            tr.rate = rate;
            tr.finish = std::isinf(rate) ? now_ : now_ + std::max(tr.remaining, 0.0) / rate;
        }
        if (stats_) {
            ++stats_->rate_recomputations;
            stats_->max_active_transfers = std::max(stats_->max_active_transfers, active_.size());
        }
    }

    void handle(const Event& ev) {
        switch (ev.kind) {
            case SimEventKind::job_submitted:
                queue_.push_back(ev.payload);
                if (stats_) stats_->max_queue_length = std::max(stats_->max_queue_length, queue_.size());
                break;
            case SimEventKind::transfer_rate_change: {
                Transfer& tr = transfers_[ev.payload];
                tr.active = true;
                for (auto r : tr.resources) ++resources_[r].active;
                active_.push_back(ev.payload);
                recompute_rates();
                break;
            }
            case SimEventKind::compute_done:
                on_compute_done(ev.payload);
                break;
            case SimEventKind::transfer_done:
            case SimEventKind::output_done:
                break;
        }
    }

    void complete_transfers(double t) {
        const double tolerance = 1e-12 * std::max(1.0, std::abs(t));
        std::vector<std::size_t> done;
        std::vector<std::size_t> keep;
        for (auto id : active_) (transfers_[id].finish <= t + tolerance ? done : keep).push_back(id);
        std::sort(done.begin(), done.end(), [&](std::size_t a, std::size_t b) {
            const auto ja = jobs_[transfers_[a].job]->job_index;
            const auto jb = jobs_[transfers_[b].job]->job_index;
            return ja != jb ? ja < jb : a < b;
        });
        active_ = std::move(keep);
        for (auto id : done) {
            Transfer& tr = transfers_[id];
            if (options_.audit) {
                if (!std::isinf(tr.rate) && std::abs(tr.moved - tr.size) > 1e-6 * tr.size)
                    fail(ErrorCategory::internal, "audit: transfer moved " + std::to_string(tr.moved) +
                                                      " bytes, expected " + std::to_string(tr.size));
                if (stats_) ++stats_->audit_checks;
            }
            tr.remaining = 0.0;
            tr.active = false;
            for (auto r : tr.resources) --resources_[r].active;
        }
        recompute_rates();
        for (auto id : done) {
            const Transfer& tr = transfers_[id];
            if (tr.output)
                finish_job(tr.job);
            else if (--state_[tr.job].pending_inputs == 0)
                start_compute(tr.job);
        }
    }

    std::size_t start_transfer(std::size_t job, const std::string& src, const std::string& dst, double bytes,
                               bool output) {
        auto hops = platform_.route(src, dst);
        if (!hops) fail(ErrorCategory::simulation, "no route between '" + src + "' and '" + dst + "'");
        Transfer tr;
        tr.job = job;
        tr.output = output;
        tr.size = bytes;
        tr.remaining = bytes;
        double latency = 0.0;
        for (const auto& link_id : *hops) {
            const std::size_t l = *platform_.find_link(link_id);
            tr.resources.push_back(l);
            latency += platform_.links[l].latency;
        }
        const std::size_t n_links = platform_.links.size();
        const std::size_t n_nodes = platform_.nodes.size();
        tr.resources.push_back(n_links + *platform_.find_node(src));
        tr.resources.push_back(n_links + n_nodes + *platform_.find_node(dst));
        transfers_.push_back(std::move(tr));
        const std::size_t id = transfers_.size() - 1;
        push(now_ + latency, SimEventKind::transfer_rate_change, id, jobs_[job]->job_index);
        return id;
    }

    void dispatch() {
        while (!queue_.empty()) {
            std::size_t best = workers_.size();
            for (std::size_t w = 0; w < workers_.size(); ++w)
                if (workers_[w].free_cores > 0 && (best == workers_.size() || workers_[w].free_cores > workers_[best].free_cores))
                    best = w;
            if (best == workers_.size()) return;
            const std::size_t j = queue_.front();
            queue_.pop_front();
            WorkerState& worker = workers_[best];
            --worker.free_cores;
            worker.running.insert(j);

            JobState& st = state_[j];
            st.worker = best;
            st.start = now_;
            const JobSpec& job = *jobs_[j];
            const std::string& worker_id = platform_.nodes[worker.node].id;
            st.pending_inputs = static_cast<int>(job.input_files.size());
            for (const auto& fid : job.input_files) {
                const FileSpec* f = files_.at(fid);
                start_transfer(j, f->location, worker_id, static_cast<double>(f->size), false);
            }
            if (st.pending_inputs == 0) start_compute(j);
        }
    }

    void start_compute(std::size_t j) {
        JobState& st = state_[j];
        st.input_done = now_;
        st.compute_time = jobs_[j]->flops / workers_[st.worker].core_speed;
        st.compute_done = now_ + st.compute_time;
        push(st.compute_done, SimEventKind::compute_done, j);
    }

    void on_compute_done(std::size_t j) {
        const JobSpec& job = *jobs_[j];
        JobState& st = state_[j];
        if (job.output_files_size == 0) {
            finish_job(j);
            return;
        }
        const std::string& worker_id = platform_.nodes[workers_[st.worker].node].id;
        start_transfer(j, worker_id, st.output_location, static_cast<double>(job.output_files_size), true);
    }

    void finish_job(std::size_t j) {
        const JobSpec& job = *jobs_[j];
        JobState& st = state_[j];
        WorkerState& worker = workers_[st.worker];
        ++worker.free_cores;
        worker.running.erase(j);

        TraceRecord& rec = records_[j];
        rec.simulation_id = job.simulation_id;
        rec.job_index = job.job_index;
        rec.submission_time = job.submission_time;
        rec.start_time = st.start;
        rec.end_time = now_;
        rec.compute_time = st.compute_time;
        rec.input_files_transfer_time = st.input_done - st.start;
        rec.output_files_transfer_time = now_ - st.compute_done;
        rec.input_bytes = 0;
        for (const auto& fid : job.input_files) rec.input_bytes += files_.at(fid)->size;
        rec.output_bytes = job.output_files_size;
        rec.worker_id = platform_.nodes[worker.node].id;
    }

    void audit_cores() {
        for (const auto& w : workers_) {
            if (w.free_cores < 0 || w.free_cores > w.cores ||
                static_cast<int>(w.running.size()) != w.cores - w.free_cores)
                fail(ErrorCategory::internal, "audit: core accounting violated on '" +
                                                  platform_.nodes[w.node].id + "' at t=" + std::to_string(now_));
        }
        if (stats_) ++stats_->audit_checks;
    }

    const PlatformSpec& platform_;
    SimOptions options_;
    SimStats* stats_ = nullptr;

    std::vector<const JobSpec*> jobs_;
    std::unordered_map<std::string, const FileSpec*> files_;
    std::vector<JobState> state_;
    std::vector<TraceRecord> records_;
    std::vector<WorkerState> workers_;
    std::vector<Resource> resources_;
    std::vector<Transfer> transfers_;
    std::vector<std::size_t> active_;
    std::deque<std::size_t> queue_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
};

}  // namespace

std::vector<TraceRecord> run_simulation(const PlatformSpec& platform, const std::vector<JobSpec>& jobs,
                                        const DatasetSpec& dataset, const SimOptions& options) {
    Engine engine(platform, jobs, dataset, options);
    engine.set_stats(options.stats);
    return engine.run();
}

std::vector<BenchRow> bench_simulation(const PlatformSpec& platform, Scenario scenario,
                                       const std::vector<SuiteEntry>& suite, std::uint64_t seed,
                                       const WorkloadConfig& config, int repeats) {
    if (suite.empty()) fail(ErrorCategory::argument, "bench suite must be nonempty");
    if (repeats < 1) fail(ErrorCategory::argument, "bench repeats must be >= 1");
    std::vector<BenchRow> rows;
    for (const auto& entry : suite) {
        const Workload w = generate_workload(scenario, entry.n_jobs, 0, seed, config);
        std::vector<double> samples;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            auto trace = run_simulation(platform, w.jobs, w.dataset);
            const auto t1 = std::chrono::steady_clock::now();
            samples.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(samples.begin(), samples.end());
        rows.push_back({to_string(scenario), entry.n_jobs, samples[samples.size() / 2]});
    }
    return rows;
}

}  // namespace dcs
