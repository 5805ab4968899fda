// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/solver.hpp>

#include <algorithm>
#include <deque>
#include <functional>

namespace gasbound::solver
{
using crs::CostEquation;
using crs::CostRelationSystem;

std::string_view outcome_name(AnalysisOutcome::Kind kind)
{
    switch (kind)
    {
    case AnalysisOutcome::Kind::bound:
        return "bound";
    case AnalysisOutcome::Kind::finite_no_bound:
        return "finite (maximization error)";
    case AnalysisOutcome::Kind::termination_unknown:
        return "termination unknown (ranking function error)";
    case AnalysisOutcome::Kind::cover_point_error:
        return "complex control flow (cover point error)";
    case AnalysisOutcome::Kind::timeout:
        return "timeout";
    }
    return "?";
}

namespace
{
struct TimeoutSignal
{
};

struct FailSignal
{
    AnalysisOutcome outcome;
};

BoundExpr linear_to_bound(const LinearExpr& e)
{
    std::vector<BoundExpr> terms;
    if (e.constant != 0 || e.coeffs.empty())
        terms.push_back(BoundExpr::constant(e.constant));
    for (const auto& [name, c] : e.coeffs)
        terms.push_back(BoundExpr::mul({BoundExpr::constant(c), BoundExpr::param(name)}));
    if (terms.size() == 1)
        return terms[0];
    return BoundExpr::add(std::move(terms));
}

BoundExpr rename_params(const BoundExpr& e, const std::map<std::string, std::string>& map)
{
    switch (e.kind())
    {
    case BoundExpr::Kind::param:
    {
        const auto it = map.find(e.name());
        return it == map.end() ? e : BoundExpr::param(it->second);
    }
    case BoundExpr::Kind::constant:
    case BoundExpr::Kind::unknown:
        return e;
    default:
        break;
    }
    std::vector<BoundExpr> children;
    children.reserve(e.children().size());
    for (const auto& c : e.children())
        children.push_back(rename_params(c, map));
    switch (e.kind())
    {
    case BoundExpr::Kind::add:
        return BoundExpr::add(std::move(children));
    case BoundExpr::Kind::mul:
        return BoundExpr::mul(std::move(children));
    case BoundExpr::Kind::max:
        return BoundExpr::max(std::move(children));
    case BoundExpr::Kind::nat:
        return BoundExpr::nat(std::move(children[0]));
    case BoundExpr::Kind::floor_div:
        return BoundExpr::floor_div(std::move(children[0]), e.divisor());
    case BoundExpr::Kind::byte_width:
        return BoundExpr::byte_width(std::move(children[0]));
    default:
        return e;
    }
}

LinearSystem build_system(const std::vector<LinearConstraint>& constraints)
{
    LinearSystem sys;
    std::set<std::string> vars;
    for (const auto& c : constraints)
    {
        sys.add(c);
        for (const auto& [v, _] : c.lhs.coeffs)
            vars.insert(v);
        for (const auto& [v, _] : c.rhs.coeffs)
            vars.insert(v);
    }
    // Every modelled value is a non-negative integer.
    for (const auto& v : vars)
        sys.add_row(LinearExpr() - LinearExpr::variable(v), false);
    return sys;
}

/// Chooses the preferred upper bound: equality-derived bounds come first in
/// `upper_bounds`, then prefer fewer variables, then the deterministic
/// textual order.
std::optional<LinearExpr> pick_bound(const std::vector<LinearExpr>& bounds)
{
    if (bounds.empty())
        return std::nullopt;
    return bounds.front();
}

BoundExpr project_linear(const LinearExpr& expr, const LinearSystem& system,
    const std::set<std::string>& targets, std::string* fail_detail)
{
    bool inside = true;
    for (const auto& [v, _] : expr.coeffs)
        if (!targets.contains(v))
            inside = false;
    if (inside)
        return linear_to_bound(expr);

    const auto bounds = system.upper_bounds(expr, targets);
    if (const auto chosen = pick_bound(bounds))
        return linear_to_bound(*chosen);
    if (fail_detail != nullptr && fail_detail->empty())
    {
        for (const auto& [v, _] : expr.coeffs)
            if (!targets.contains(v))
            {
                *fail_detail = "no upper bound for " + v;
                break;
            }
    }
    return BoundExpr::unknown();
}

BoundExpr maximize_impl(const BoundExpr& expr, const LinearSystem& system,
    const std::set<std::string>& targets, std::string* fail_detail)
{
    if (const auto linear = expr.to_linear())
    {
        LinearExpr le;
        le.constant = linear->first;
        le.coeffs = linear->second;
        return project_linear(le, system, targets, fail_detail);
    }
    switch (expr.kind())
    {
    case BoundExpr::Kind::constant:
    case BoundExpr::Kind::unknown:
        return expr;
    case BoundExpr::Kind::param:
        return project_linear(
            LinearExpr::variable(expr.name()), system, targets, fail_detail);
    default:
        break;
    }
    std::vector<BoundExpr> children;
    children.reserve(expr.children().size());
    for (const auto& c : expr.children())
        children.push_back(maximize_impl(c, system, targets, fail_detail));
    switch (expr.kind())
    {
    case BoundExpr::Kind::add:
        return BoundExpr::add(std::move(children));
    case BoundExpr::Kind::mul:
        return BoundExpr::mul(std::move(children));
    case BoundExpr::Kind::max:
        return BoundExpr::max(std::move(children));
    case BoundExpr::Kind::nat:
        return BoundExpr::nat(std::move(children[0]));
    case BoundExpr::Kind::floor_div:
        return BoundExpr::floor_div(std::move(children[0]), expr.divisor());
    case BoundExpr::Kind::byte_width:
        return BoundExpr::byte_width(std::move(children[0]));
    default:
        return expr;
    }
}
}  // namespace

BoundExpr maximize_cost(const BoundExpr& expr,
    const std::vector<LinearConstraint>& context,
    const std::set<std::string>& entry_params, std::string* fail_detail)
{
    const LinearSystem system = build_system(context);
    return maximize_impl(expr, system, entry_params, fail_detail).simplified();
}

// ---------------------------------------------------------------------------
// ranking functions
// ---------------------------------------------------------------------------

namespace
{
std::optional<rational> best_constant_upper_bound(
    const LinearSystem& system, const LinearExpr& objective)
{
    std::optional<rational> best;
    for (const auto& bound : system.upper_bounds(objective, {}))
    {
        if (!bound.is_constant())
            continue;
        if (!best.has_value() || bound.constant < *best)
            best = bound.constant;
    }
    return best;
}

LinearExpr rename_linear(
    const LinearExpr& e, const std::vector<std::string>& params,
    const std::vector<std::string>& next)
{
    std::map<std::string, std::string> map;
    for (size_t i = 0; i < params.size() && i < next.size(); ++i)
        map[params[i]] = next[i];
    return e.renamed(map);
}
}  // namespace

std::optional<RankingFunction> find_linear_ranking(
    const std::vector<LoopBody>& bodies, const std::vector<std::string>& params)
{
    if (bodies.empty())
        return std::nullopt;

    std::vector<LinearSystem> systems;
    systems.reserve(bodies.size());
    for (const auto& b : bodies)
        systems.push_back(build_system(b.constraints));

    std::vector<LinearExpr> candidates;
    for (const auto& p : params)
        candidates.push_back(LinearExpr::variable(p));
    for (const auto& p : params)
        for (const auto& q : params)
            if (p != q)
                candidates.push_back(
                    LinearExpr::variable(p) - LinearExpr::variable(q));

    for (const auto& r : candidates)
    {
        std::optional<rational> delta;
        bool ok = true;
        for (size_t i = 0; i < bodies.size() && ok; ++i)
        {
            const LinearExpr r_next = rename_linear(r, params, bodies[i].next);
            const auto decrease =
                best_constant_upper_bound(systems[i], r_next - r);
            if (!decrease.has_value() || *decrease >= 0)
            {
                ok = false;
                break;
            }
            // positivity: constraints |= r >= 1
            if (!systems[i].entails_le_zero(LinearExpr(rational(1)) - r))
            {
                ok = false;
                break;
            }
            const rational d = -*decrease;
            if (!delta.has_value() || d < *delta)
                delta = d;
        }
        if (ok && delta.has_value() && *delta > 0)
        {
            const RankingFunction rf{r, *delta};
            if (verify_ranking(rf, bodies, params))
                return rf;
        }
    }
    return std::nullopt;
}

bool verify_ranking(const RankingFunction& rf, const std::vector<LoopBody>& bodies,
    const std::vector<std::string>& params)
{
    for (const auto& body : bodies)
    {
        const LinearSystem system = build_system(body.constraints);
        const LinearExpr r_next = rename_linear(rf.expr, params, body.next);
        // r' - r + delta <= 0  and  1 - r <= 0
        LinearExpr decrease = r_next - rf.expr;
        decrease.constant += rf.decrease;
        if (!system.entails_le_zero(decrease))
            return false;
        if (!system.entails_le_zero(LinearExpr(rational(1)) - rf.expr))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// the solver proper
// ---------------------------------------------------------------------------

namespace
{
struct Call
{
    std::string head;
    std::vector<std::string> args;
};

struct Body
{
    BoundExpr cost;
    std::vector<LinearConstraint> constraints;
    std::optional<Call> tail;
};

/// Direction of one parameter through the iterations of a family.
struct ParamInfo
{
    enum class Dir
    {
        invariant,
        nonincreasing,
        nondecreasing,
        unknown,
    };
    Dir dir = Dir::unknown;
    std::optional<BoundExpr> climb_ub;  // valid while iterating, nondecreasing only
};

class Solver
{
public:
    Solver(const CostRelationSystem& crs, std::chrono::milliseconds timeout,
        SolveStats* stats)
        : crs_(crs), deadline_(std::chrono::steady_clock::now() + timeout),
          stats_(stats)
    {
    }

    AnalysisOutcome run()
    {
        try
        {
            for (const auto& eq : crs_.equations)
            {
                eqs_[eq.head].push_back(eq);
                params_.emplace(eq.head, eq.params);
            }
            if (!eqs_.contains(crs_.entry))
                return {AnalysisOutcome::Kind::bound, BoundExpr::constant(0),
                    "entry has no equations"};

            const auto order = scc_order();
            for (const auto& scc : order)
            {
                if (scc.size() == 1 && !calls(*scc.begin()).contains(*scc.begin()))
                    solve_plain(*scc.begin());
                else
                    solve_scc(scc);
            }

            const BoundExpr bound = solved_.at(crs_.entry).simplified();
            if (bound.contains_unknown())
                return {AnalysisOutcome::Kind::finite_no_bound, {}, max_fail_};
            return {AnalysisOutcome::Kind::bound, bound, {}};
        }
        catch (const TimeoutSignal&)
        {
            return {AnalysisOutcome::Kind::timeout, {}, "deadline exceeded"};
        }
        catch (const FailSignal& fail)
        {
            if (expired())
                return {AnalysisOutcome::Kind::timeout, {}, "deadline exceeded"};
            return fail.outcome;
        }
    }

private:
    const CostRelationSystem& crs_;
    std::chrono::steady_clock::time_point deadline_;
    SolveStats* stats_;
    std::map<std::string, std::vector<CostEquation>> eqs_;
    std::map<std::string, std::vector<std::string>> params_;
    std::map<std::string, BoundExpr> solved_;
    std::string max_fail_;
    uint64_t rename_counter_ = 0;

    bool expired() const { return std::chrono::steady_clock::now() > deadline_; }
    void checkpoint()
    {
        if (expired())
            throw TimeoutSignal{};
    }

    std::set<std::string> calls(const std::string& head) const
    {
        std::set<std::string> out;
        const auto it = eqs_.find(head);
        if (it == eqs_.end())
            return out;
        for (const auto& eq : it->second)
            if (eq.call.has_value())
                out.insert(eq.call->callee);
        return out;
    }

    /// SCCs of the call graph in reverse topological order (callees first).
    std::vector<std::set<std::string>> scc_order()
    {
        std::vector<std::string> heads;
        for (const auto& [h, _] : eqs_)
            heads.push_back(h);

        std::map<std::string, int> index, low;
        std::map<std::string, bool> on_stack;
        std::vector<std::string> stack;
        std::vector<std::set<std::string>> sccs;
        int counter = 0;

        // Iterative Tarjan.
        struct Frame
        {
            std::string node;
            std::vector<std::string> succs;
            size_t next = 0;
        };
        for (const auto& root : heads)
        {
            if (index.contains(root))
                continue;
            std::vector<Frame> work;
            const auto open = [&](const std::string& n) {
                index[n] = low[n] = counter++;
                on_stack[n] = true;
                stack.push_back(n);
                Frame f;
                f.node = n;
                for (const auto& c : calls(n))
                    if (eqs_.contains(c))
                        f.succs.push_back(c);
                work.push_back(std::move(f));
            };
            open(root);
            while (!work.empty())
            {
                Frame& frame = work.back();
                if (frame.next < frame.succs.size())
                {
                    const std::string succ = frame.succs[frame.next++];
                    if (!index.contains(succ))
                        open(succ);
                    else if (on_stack[succ])
                        low[frame.node] = std::min(low[frame.node], index[succ]);
                    continue;
                }
                if (low[frame.node] == index[frame.node])
                {
                    std::set<std::string> scc;
                    while (true)
                    {
                        const std::string n = stack.back();
                        stack.pop_back();
                        on_stack[n] = false;
                        scc.insert(n);
                        if (n == frame.node)
                            break;
                    }
                    sccs.push_back(std::move(scc));
                }
                const std::string done = frame.node;
                work.pop_back();
                if (!work.empty())
                    low[work.back().node] = std::min(low[work.back().node], low[done]);
            }
        }
        return sccs;  // Tarjan emits SCCs in reverse topological order
    }

    Body body_of(const CostEquation& eq) const
    {
        Body b;
        b.cost = eq.cost;
        b.constraints = eq.constraints;
        if (eq.call.has_value())
            b.tail = Call{eq.call->callee, eq.call->args};
        return b;
    }

    /// Inlines `eq` (an equation of body.tail->head) into `body`.
    Body inline_equation(const Body& body, const CostEquation& eq)
    {
        const uint64_t k = ++rename_counter_;
        std::map<std::string, std::string> rename;
        for (size_t i = 0; i < eq.params.size(); ++i)
            rename[eq.params[i]] =
                i < body.tail->args.size() ? body.tail->args[i] :
                                             eq.params[i] + "@" + std::to_string(k);
        const auto fresh = [&](const std::string& v) {
            if (!rename.contains(v))
                rename[v] = v + "@" + std::to_string(k);
        };
        if (eq.call.has_value())
            for (const auto& a : eq.call->args)
                fresh(a);
        for (const auto& c : eq.constraints)
        {
            for (const auto& [v, _] : c.lhs.coeffs)
                fresh(v);
            for (const auto& [v, _] : c.rhs.coeffs)
                fresh(v);
        }
        for (const auto& p : eq.cost.params())
            fresh(p);

        Body out;
        out.constraints = body.constraints;
        for (const auto& c : eq.constraints)
            out.constraints.push_back(c.renamed(rename));
        out.cost = BoundExpr::add({body.cost, rename_params(eq.cost, rename)});
        if (eq.call.has_value())
        {
            Call call;
            call.head = eq.call->callee;
            for (const auto& a : eq.call->args)
                call.args.push_back(rename.at(a));
            out.tail = std::move(call);
        }
        return out;
    }

    /// Substitutes an already-solved callee's closed form into the body.
    Body inline_solved(const Body& body, const BoundExpr& bound,
        const std::vector<std::string>& callee_params)
    {
        std::map<std::string, std::string> rename;
        for (size_t i = 0; i < callee_params.size() && i < body.tail->args.size(); ++i)
            rename[callee_params[i]] = body.tail->args[i];
        Body out = body;
        out.cost = BoundExpr::add({body.cost, rename_params(bound, rename)});
        out.tail.reset();
        return out;
    }

    /// Expands `head`'s equations through the interior of `scc` until every
    /// body either recurses back to `head`, halts, or tails out of the SCC.
    std::vector<Body> unfold(const std::string& head, const std::set<std::string>& scc)
    {
        std::vector<Body> done;
        std::deque<Body> queue;
        for (const auto& eq : eqs_.at(head))
            queue.push_back(body_of(eq));

        while (!queue.empty())
        {
            checkpoint();
            if (stats_ != nullptr)
                ++stats_->unfolded_bodies;
            Body body = std::move(queue.front());
            queue.pop_front();
            if (!body.tail.has_value() || body.tail->head == head)
            {
                done.push_back(std::move(body));
                continue;
            }
            const std::string& callee = body.tail->head;
            if (!scc.contains(callee))
            {
                if (const auto it = solved_.find(callee); it != solved_.end())
                    done.push_back(
                        inline_solved(body, it->second, params_.at(callee)));
                else
                    done.push_back(std::move(body));  // outer head: keep symbolic
                continue;
            }
            const auto it = eqs_.find(callee);
            if (it == eqs_.end() || it->second.empty())
            {
                // Callee without equations: treat as an unknowable cost.
                Body out = std::move(body);
                out.cost = BoundExpr::add({out.cost, BoundExpr::unknown()});
                if (max_fail_.empty())
                    max_fail_ = "no equations for " + callee;
                out.tail.reset();
                done.push_back(std::move(out));
                continue;
            }
            for (const auto& eq : it->second)
            {
                queue.push_back(inline_equation(body, eq));
                if (queue.size() + done.size() > (1u << 20))
                    throw TimeoutSignal{};
            }
        }
        return done;
    }

    void solve_plain(const std::string& head)
    {
        const auto bodies = unfold(head, {head});
        const std::set<std::string> targets(
            params_.at(head).begin(), params_.at(head).end());
        std::vector<BoundExpr> choices;
        for (const auto& body : bodies)
        {
            checkpoint();
            choices.push_back(
                maximize_cost(body.cost, body.constraints, targets, &max_fail_));
        }
        solved_[head] = choices.empty() ?
                            BoundExpr::constant(0) :
                            BoundExpr::max(std::move(choices)).simplified();
    }

    /// Heads of `scc` that are called from outside it (or are the CRS entry).
    std::set<std::string> scc_entries(const std::set<std::string>& scc) const
    {
        std::set<std::string> entries;
        if (scc.contains(crs_.entry))
            entries.insert(crs_.entry);
        for (const auto& [head, eqs] : eqs_)
        {
            if (scc.contains(head))
                continue;
            for (const auto& eq : eqs)
                if (eq.call.has_value() && scc.contains(eq.call->callee))
                    entries.insert(eq.call->callee);
        }
        return entries;
    }

    void solve_scc(const std::set<std::string>& scc)
    {
        checkpoint();
        const auto entries = scc_entries(scc);
        if (entries.size() != 1)
        {
            throw FailSignal{{AnalysisOutcome::Kind::cover_point_error, {},
                "recursive group with " + std::to_string(entries.size()) +
                    " entry points cannot be made directly recursive"}};
        }
        const std::string head = *entries.begin();

        // Summarize the inner loops (innermost first).
        std::set<std::string> interior = scc;
        interior.erase(head);
        for (const auto& inner : interior_sccs(interior))
            solve_scc(inner);

        const auto bodies = unfold(head, scc);
        std::vector<Body> recursive;
        std::vector<Body> exits;
        for (const auto& b : bodies)
        {
            if (b.tail.has_value() && b.tail->head == head)
                recursive.push_back(b);
            else
                exits.push_back(b);
        }
        if (recursive.empty())
        {
            // The cycle dissolved during summarization; treat as plain.
            finish_head(head, scc, exits, BoundExpr::constant(0), {});
            return;
        }
        if (stats_ != nullptr)
            ++stats_->loops_solved;

        const std::vector<std::string>& params = params_.at(head);
        const std::set<std::string> targets(params.begin(), params.end());

        // Zero-cost recursive families skip the ranking search entirely.
        bool zero_cost = true;
        for (const auto& b : recursive)
        {
            const BoundExpr c = b.cost.simplified();
            if (!(c.is_constant() && c.value() == 0))
                zero_cost = false;
        }

        const auto info = classify_params(recursive, params);

        BoundExpr iter_total = BoundExpr::constant(0);
        if (!zero_cost)
        {
            if (stats_ != nullptr)
                ++stats_->ranking_searches;
            std::vector<LoopBody> loop_bodies;
            for (const auto& b : recursive)
                loop_bodies.push_back({b.cost, b.constraints, b.tail->args});
            const auto rf = find_linear_ranking(loop_bodies, params);
            checkpoint();
            if (!rf.has_value())
                throw FailSignal{{AnalysisOutcome::Kind::termination_unknown, {},
                    "no linear ranking function for " + head}};

            BoundExpr iterations = iterations_bound(*rf);
            BoundExpr iter_cost = BoundExpr::constant(0);
            std::vector<BoundExpr> per_body;
            for (const auto& b : recursive)
            {
                BoundExpr m =
                    maximize_cost(b.cost, b.constraints, targets, &max_fail_);
                per_body.push_back(rewrite_to_entry(m, info, targets));
            }
            iter_cost = per_body.size() == 1 ?
                            per_body[0] :
                            BoundExpr::max(std::move(per_body));
            iter_total =
                BoundExpr::mul({std::move(iterations), std::move(iter_cost)})
                    .simplified();
        }

        finish_head(head, scc, exits, iter_total, info);
    }

    /// Interior SCCs (size > 1 or self-recursive) of the given head set.
    std::vector<std::set<std::string>> interior_sccs(const std::set<std::string>& heads)
    {
        // Reuse Tarjan on the restricted graph by temporarily filtering.
        std::vector<std::set<std::string>> result;
        std::map<std::string, int> color;  // 0 unvisited, 1 in progress, 2 done
        // Simple recursive Tarjan over a small set.
        std::map<std::string, int> index, low;
        std::vector<std::string> stack;
        std::map<std::string, bool> on_stack;
        int counter = 0;
        std::function<void(const std::string&)> strongconnect =
            [&](const std::string& v) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
                for (const auto& w : calls(v))
                {
                    if (!heads.contains(w))
                        continue;
                    if (!index.contains(w))
                    {
                        strongconnect(w);
                        low[v] = std::min(low[v], low[w]);
                    }
                    else if (on_stack[w])
                        low[v] = std::min(low[v], index[w]);
                }
                if (low[v] == index[v])
                {
                    std::set<std::string> scc;
                    while (true)
                    {
                        const std::string n = stack.back();
                        stack.pop_back();
                        on_stack[n] = false;
                        scc.insert(n);
                        if (n == v)
                            break;
                    }
                    const bool cyclic =
                        scc.size() > 1 || calls(*scc.begin()).contains(*scc.begin());
                    if (cyclic)
                        result.push_back(std::move(scc));
                }
            };
        for (const auto& h : heads)
            if (!index.contains(h))
                strongconnect(h);
        return result;  // reverse topological: innermost summarized first
    }

    BoundExpr iterations_bound(const RankingFunction& rf) const
    {
        const BoundExpr r0 = linear_to_bound(rf.expr);
        if (rf.decrease == 1)
            return BoundExpr::nat(r0);
        // ceil(r0 / delta) with delta = p/q: floor((q*r0 + p - 1) / p)
        const bigint p = numerator(rf.decrease);
        const bigint q = denominator(rf.decrease);
        return BoundExpr::nat(BoundExpr::floor_div(
            BoundExpr::add({BoundExpr::mul({BoundExpr::constant(rational(q)), r0}),
                BoundExpr::constant(rational(p - 1))}),
            p));
    }

    std::map<std::string, ParamInfo> classify_params(
        const std::vector<Body>& recursive, const std::vector<std::string>& params)
    {
        std::map<std::string, ParamInfo> info;
        std::vector<LinearSystem> systems;
        for (const auto& b : recursive)
            systems.push_back(build_system(b.constraints));

        // First pass: directions.
        std::map<std::string, rational> max_step;
        for (size_t i = 0; i < params.size(); ++i)
        {
            const std::string& p = params[i];
            bool nonincreasing = true;
            bool nondecreasing = true;
            std::optional<rational> step_ub;
            for (size_t b = 0; b < recursive.size(); ++b)
            {
                const auto& args = recursive[b].tail->args;
                if (i >= args.size())
                {
                    nonincreasing = nondecreasing = false;
                    break;
                }
                const LinearExpr next = LinearExpr::variable(args[i]);
                const LinearExpr cur = LinearExpr::variable(p);
                const auto up = best_constant_upper_bound(systems[b], next - cur);
                const auto down = best_constant_upper_bound(systems[b], cur - next);
                if (!up.has_value() || *up > 0)
                    nonincreasing = false;
                if (!down.has_value() || *down > 0)
                    nondecreasing = false;
                if (up.has_value())
                    step_ub = step_ub.has_value() ? std::max(*step_ub, *up) : *up;
                else
                    step_ub.reset();
            }
            ParamInfo pi;
            if (nonincreasing && nondecreasing)
                pi.dir = ParamInfo::Dir::invariant;
            else if (nonincreasing)
                pi.dir = ParamInfo::Dir::nonincreasing;
            else if (nondecreasing)
                pi.dir = ParamInfo::Dir::nondecreasing;
            if (pi.dir == ParamInfo::Dir::nondecreasing && step_ub.has_value())
                max_step[p] = *step_ub;
            info[p] = pi;
        }

        // Second pass: climbing parameters bounded by an invariant guard.
        std::set<std::string> invariant_params;
        for (const auto& [p, pi] : info)
            if (pi.dir == ParamInfo::Dir::invariant)
                invariant_params.insert(p);
        for (size_t i = 0; i < params.size(); ++i)
        {
            const std::string& p = params[i];
            auto& pi = info[p];
            if (pi.dir != ParamInfo::Dir::nondecreasing || !max_step.contains(p))
                continue;
            std::vector<BoundExpr> choices;
            bool ok = true;
            for (auto& system : systems)
            {
                const auto bounds =
                    system.upper_bounds(LinearExpr::variable(p), invariant_params);
                const auto chosen = pick_bound(bounds);
                if (!chosen.has_value())
                {
                    ok = false;
                    break;
                }
                LinearExpr adjusted = *chosen;
                adjusted.constant += max_step.at(p);
                choices.push_back(linear_to_bound(adjusted));
            }
            if (ok && !choices.empty())
                pi.climb_ub = BoundExpr::max(std::move(choices)).simplified();
        }
        return info;
    }

    /// Rewrites a per-iteration expression (over the family parameters at an
    /// arbitrary iteration) into the entry values of those parameters.
    BoundExpr rewrite_to_entry(const BoundExpr& expr,
        const std::map<std::string, ParamInfo>& info,
        const std::set<std::string>& targets)
    {
        if (const auto linear = expr.to_linear())
        {
            std::vector<BoundExpr> terms;
            terms.push_back(BoundExpr::constant(linear->first));
            for (const auto& [p, c] : linear->second)
            {
                const auto it = info.find(p);
                const auto dir =
                    it == info.end() ? ParamInfo::Dir::unknown : it->second.dir;
                if (c > 0)
                {
                    switch (dir)
                    {
                    case ParamInfo::Dir::invariant:
                    case ParamInfo::Dir::nonincreasing:
                        terms.push_back(BoundExpr::mul(
                            {BoundExpr::constant(c), BoundExpr::param(p)}));
                        break;
                    case ParamInfo::Dir::nondecreasing:
                        if (it->second.climb_ub.has_value())
                        {
                            terms.push_back(BoundExpr::mul({BoundExpr::constant(c),
                                BoundExpr::max(
                                    {BoundExpr::param(p), *it->second.climb_ub})}));
                            break;
                        }
                        [[fallthrough]];
                    case ParamInfo::Dir::unknown:
                        if (max_fail_.empty())
                            max_fail_ = "no iteration bound for " + p;
                        terms.push_back(BoundExpr::unknown());
                        break;
                    }
                }
                else
                {
                    // negative coefficient: a lower bound is needed
                    switch (dir)
                    {
                    case ParamInfo::Dir::invariant:
                    case ParamInfo::Dir::nondecreasing:
                        terms.push_back(BoundExpr::mul(
                            {BoundExpr::constant(c), BoundExpr::param(p)}));
                        break;
                    default:
                        break;  // p >= 0: the term is <= 0, drop it
                    }
                }
            }
            return BoundExpr::add(std::move(terms)).simplified();
        }
        switch (expr.kind())
        {
        case BoundExpr::Kind::constant:
        case BoundExpr::Kind::unknown:
            return expr;
        default:
            break;
        }
        std::vector<BoundExpr> children;
        for (const auto& c : expr.children())
            children.push_back(rewrite_to_entry(c, info, targets));
        switch (expr.kind())
        {
        case BoundExpr::Kind::add:
            return BoundExpr::add(std::move(children));
        case BoundExpr::Kind::mul:
            return BoundExpr::mul(std::move(children));
        case BoundExpr::Kind::max:
            return BoundExpr::max(std::move(children));
        case BoundExpr::Kind::nat:
            return BoundExpr::nat(std::move(children[0]));
        case BoundExpr::Kind::floor_div:
            return BoundExpr::floor_div(std::move(children[0]), expr.divisor());
        case BoundExpr::Kind::byte_width:
            return BoundExpr::byte_width(std::move(children[0]));
        default:
            return expr;
        }
    }

    /// Installs the result for `head`: either a closed bound (no symbolic
    /// tails remain) or summary equations for the enclosing group.
    void finish_head(const std::string& head, const std::set<std::string>& scc,
        const std::vector<Body>& exits, const BoundExpr& iter_total,
        const std::map<std::string, ParamInfo>& info)
    {
        const std::vector<std::string>& params = params_.at(head);
        const std::set<std::string> targets(params.begin(), params.end());

        std::vector<BoundExpr> closed;
        std::vector<CostEquation> summaries;
        for (const auto& body : exits)
        {
            checkpoint();
            BoundExpr value =
                maximize_cost(body.cost, body.constraints, targets, &max_fail_);
            if (!info.empty())
                value = rewrite_to_entry(value, info, targets);
            value = BoundExpr::add({iter_total, value}).simplified();
            if (!body.tail.has_value())
            {
                closed.push_back(std::move(value));
                continue;
            }
            // Summary equation with a symbolic tail to an outer head.
            CostEquation eq;
            eq.head = head;
            eq.params = params;
            eq.cost = value;
            const std::vector<std::string>& callee_params =
                params_.contains(body.tail->head) ? params_.at(body.tail->head) :
                                                    std::vector<std::string>{};
            CostEquation::Call call;
            call.callee = body.tail->head;
            std::map<std::string, std::string> rename;
            std::set<std::string> keep = targets;
            for (size_t i = 0; i < callee_params.size() && i < body.tail->args.size();
                 ++i)
            {
                const std::string primed = callee_params[i] + "'";
                rename[body.tail->args[i]] = primed;
                call.args.push_back(primed);
                keep.insert(primed);
            }
            eq.call = std::move(call);

            // Project the body constraints (plus the iteration relations)
            // onto the summary's variables.
            LinearSystem system;
            std::map<std::string, std::string> iteration_rename;
            for (const auto& p : params)
                iteration_rename[p] = p + "@it";
            for (const auto& c : body.constraints)
                system.add(c.renamed(iteration_rename).renamed(rename));
            for (const auto& [p, pi] : info)
            {
                const LinearExpr it_var = LinearExpr::variable(p + "@it");
                const LinearExpr entry_var = LinearExpr::variable(p);
                switch (pi.dir)
                {
                case ParamInfo::Dir::invariant:
                    system.add({it_var, Rel::eq, entry_var});
                    break;
                case ParamInfo::Dir::nonincreasing:
                    system.add({it_var, Rel::le, entry_var});
                    break;
                case ParamInfo::Dir::nondecreasing:
                    system.add({it_var, Rel::ge, entry_var});
                    break;
                case ParamInfo::Dir::unknown:
                    break;
                }
            }
            if (info.empty())
            {
                // Not a loop: iteration variables are the entry variables.
                for (const auto& p : params)
                    system.add({LinearExpr::variable(p + "@it"), Rel::eq,
                        LinearExpr::variable(p)});
            }
            LinearSystem projected = system;
            if (projected.project_onto(keep))
            {
                for (const auto& row : projected.equalities())
                    eq.constraints.push_back(
                        {row, Rel::eq, LinearExpr(rational(0))});
                for (const auto& row : projected.inequalities())
                    eq.constraints.push_back(
                        {row, Rel::le, LinearExpr(rational(0))});
            }
            summaries.push_back(std::move(eq));
        }

        for (const auto& h : scc)
            eqs_[h].clear();
        if (summaries.empty())
        {
            BoundExpr bound = closed.empty() ?
                                  iter_total :
                                  BoundExpr::max(std::move(closed)).simplified();
            solved_[head] = std::move(bound);
            return;
        }
        for (auto& value : closed)
        {
            CostEquation eq;
            eq.head = head;
            eq.params = params;
            eq.cost = std::move(value);
            summaries.push_back(std::move(eq));
        }
        eqs_[head] = std::move(summaries);
    }
};
}  // namespace

DirectRecursionInfo to_direct_recursion(const CostRelationSystem& crs)
{
    // Feasibility only: run the solver machinery with costs zeroed and an
    // effectively unlimited budget; cover point errors surface structurally.
    CostRelationSystem stripped = crs;
    for (auto& eq : stripped.equations)
        eq.cost = BoundExpr::constant(0);
    SolveStats stats;
    const AnalysisOutcome outcome =
        solve(stripped, std::chrono::milliseconds{60000}, &stats);
    if (outcome.kind == AnalysisOutcome::Kind::cover_point_error)
        return {false, outcome.detail};
    return {true, {}};
}

AnalysisOutcome solve(const CostRelationSystem& crs, std::chrono::milliseconds timeout,
    SolveStats* stats)
{
    Solver solver(crs, timeout, stats);
    return solver.run();
}
}  // namespace gasbound::solver
