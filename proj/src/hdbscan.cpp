#include "tsg/hdbscan.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

namespace tsg {

namespace {

struct Merge {
    int left;
    int right;
    double distance;
    int size;
};

struct CondensedRow {
    int parent;
    int child;
    double lambda;
    int size;
};

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            auto& p = parent_[static_cast<std::size_t>(x)];
            p = parent_[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    }
    void link(int child, int root) { parent_[static_cast<std::size_t>(child)] = root; }

private:
    std::vector<int> parent_;
};

Mat pairwise_distances(const Mat& x) {
    const Eigen::Index n = x.rows();
    Mat d = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (x.row(i) - x.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

// Prim's algorithm on the dense mutual-reachability graph, then single
// linkage merges in order of increasing edge weight.
std::vector<Merge> single_linkage(const Mat& mreach) {
    const auto n = static_cast<int>(mreach.rows());
    struct Edge {
        int a;
        int b;
        double w;
    };
    std::vector<Edge> mst;
    std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<int> from(static_cast<std::size_t>(n), -1);
    int current = 0;
    in_tree[0] = true;
    for (int added = 1; added < n; ++added) {
        int next = -1;
        double next_w = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (in_tree[uj]) continue;
            const double w = mreach(current, j);
            if (w < best[uj]) {
                best[uj] = w;
                from[uj] = current;
            }
            if (best[uj] < next_w) {
                next_w = best[uj];
                next = j;
            }
        }
        mst.push_back({from[static_cast<std::size_t>(next)], next, next_w});
        in_tree[static_cast<std::size_t>(next)] = true;
        current = next;
    }
    std::stable_sort(mst.begin(), mst.end(), [](const Edge& a, const Edge& b) { return a.w < b.w; });

    DisjointSet sets(static_cast<std::size_t>(2 * n - 1));
    std::vector<int> size(static_cast<std::size_t>(2 * n - 1), 1);
    std::vector<Merge> merges;
    int next_id = n;
    for (const auto& e : mst) {
        const int ra = sets.find(e.a);
        const int rb = sets.find(e.b);
        const int s = size[static_cast<std::size_t>(ra)] + size[static_cast<std::size_t>(rb)];
        merges.push_back({ra, rb, e.w, s});
        sets.link(ra, next_id);
        sets.link(rb, next_id);
        size[static_cast<std::size_t>(next_id)] = s;
        ++next_id;
    }
    return merges;
}

std::vector<int> descendants(const std::vector<Merge>& merges, int n, int node) {
    std::vector<int> out;
    std::deque<int> queue{node};
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        out.push_back(v);
        if (v >= n) {
            const auto& m = merges[static_cast<std::size_t>(v - n)];
            queue.push_back(m.left);
            queue.push_back(m.right);
        }
    }
    return out;
}

std::vector<CondensedRow> condense(const std::vector<Merge>& merges, int n, int mcs) {
    const int root = 2 * n - 2;
    std::vector<int> relabel(static_cast<std::size_t>(root + 1), -1);
    std::vector<bool> ignore(static_cast<std::size_t>(root + 1), false);
    relabel[static_cast<std::size_t>(root)] = n;
    int next_label = n + 1;
    std::vector<CondensedRow> rows;
    auto size_of = [&](int v) { return v < n ? 1 : merges[static_cast<std::size_t>(v - n)].size; };

    for (int node : descendants(merges, n, root)) {
        if (node < n || ignore[static_cast<std::size_t>(node)]) continue;
        const auto& m = merges[static_cast<std::size_t>(node - n)];
        const double lambda = 1.0 / std::max(m.distance, 1e-12);
        const int parent = relabel[static_cast<std::size_t>(node)];
        const int lc = size_of(m.left);
        const int rc = size_of(m.right);
        auto fall_out = [&](int child) {
            for (int sub : descendants(merges, n, child)) {
                if (sub < n) rows.push_back({parent, sub, lambda, 1});
                ignore[static_cast<std::size_t>(sub)] = true;
            }
        };
        if (lc >= mcs && rc >= mcs) {
            relabel[static_cast<std::size_t>(m.left)] = next_label;
            rows.push_back({parent, next_label++, lambda, lc});
            relabel[static_cast<std::size_t>(m.right)] = next_label;
            rows.push_back({parent, next_label++, lambda, rc});
        } else if (lc < mcs && rc < mcs) {
            fall_out(m.left);
            fall_out(m.right);
        } else if (lc < mcs) {
            relabel[static_cast<std::size_t>(m.right)] = parent;
            fall_out(m.left);
        } else {
            relabel[static_cast<std::size_t>(m.left)] = parent;
            fall_out(m.right);
        }
    }
    return rows;
}

}  // namespace

HdbscanResult hdbscan(const Mat& x, int min_cluster_size, int min_samples) {
    const auto n = static_cast<int>(x.rows());
    if (min_cluster_size < 2) throw ValidationError("min_cluster_size must be at least 2");
    if (n < min_cluster_size) {
        throw ValidationError("hdbscan: " + std::to_string(n) + " points is fewer than min_cluster_size " +
                              std::to_string(min_cluster_size));
    }
    if (!x.allFinite()) throw ValidationError("hdbscan: non-finite input");
    if (min_samples <= 0) min_samples = min_cluster_size;
    min_samples = std::min(min_samples, n);

    const Mat d = pairwise_distances(x);
    HdbscanResult result;
    if (d.maxCoeff() == 0.0) {
        result.labels.assign(static_cast<std::size_t>(n), 0);
        result.num_clusters = 1;
        return result;
    }

    std::vector<double> core(static_cast<std::size_t>(n));
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = d(i, j);
        const auto k = static_cast<std::ptrdiff_t>(min_samples - 1);  // the point itself is its own 1st neighbor
        std::nth_element(row.begin(), row.begin() + k, row.end());
        core[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(k)];
    }
    Mat mreach(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            mreach(i, j) = std::max({d(i, j), core[static_cast<std::size_t>(i)], core[static_cast<std::size_t>(j)]});
        }
    }

    const auto rows = condense(single_linkage(mreach), n, min_cluster_size);

    // Stability of each condensed cluster.
    const int root = n;
    std::map<int, double> birth{{root, 0.0}};
    std::map<int, int> parent_of;
    for (const auto& r : rows) {
        if (r.child >= n) {
            birth[r.child] = r.lambda;
            parent_of[r.child] = r.parent;
        }
    }
    std::map<int, double> stability;
    for (const auto& [c, b] : birth) stability[c] = 0.0;
    for (const auto& r : rows) stability[r.parent] += (r.lambda - birth[r.parent]) * r.size;

    // Excess of mass, children before parents; the root is never selected.
    std::map<int, std::vector<int>> children;
    for (const auto& [c, p] : parent_of) children[p].push_back(c);
    std::map<int, bool> selected;
    for (const auto& [c, s] : stability) {
        if (c != root) selected[c] = true;
    }
    for (auto it = stability.rbegin(); it != stability.rend(); ++it) {
        const int c = it->first;
        if (c == root) continue;
        double subtree = 0.0;
        for (int ch : children[c]) subtree += stability[ch];
        if (subtree > it->second) {
            selected[c] = false;
            it->second = subtree;
        } else {
            std::deque<int> queue(children[c].begin(), children[c].end());
            while (!queue.empty()) {
                const int v = queue.front();
                queue.pop_front();
                selected[v] = false;
                for (int ch : children[v]) queue.push_back(ch);
            }
        }
    }

    std::map<int, int> label_of;
    for (const auto& [c, sel] : selected) {
        if (sel) label_of[c] = static_cast<int>(label_of.size());
    }
    result.num_clusters = static_cast<int>(label_of.size());
    result.labels.assign(static_cast<std::size_t>(n), -1);
    for (const auto& r : rows) {
        if (r.child >= n) continue;
        int c = r.parent;
        while (c != root && !selected[c]) c = parent_of[c];
        if (c != root) result.labels[static_cast<std::size_t>(r.child)] = label_of[c];
    }
    return result;
}

}  // namespace tsg
