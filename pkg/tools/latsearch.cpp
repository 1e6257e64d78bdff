// Exact lattice dissection search for tiles whose edges point along the
// N-th roots of unity.  Points live in Z[xi_N] (power basis, degree d);
// angles are counted in units of 2*pi/N.  Development tool only.
//
// stdin format (all integers):
//   N d  modulus[0..d]            (monic cyclotomic polynomial, low to high)
//   S                             number of shape variants
//   per variant: shape_id nverts  then nverts*d coords (ccw)
//   K  counts[0..K-1]             per shape id
//   T  target nverts*d coords (ccw)
//   sym  0 | 1 followed by d*d matrix (row-major, acting on coord columns) and d translation
//   P  number of prescribed boundary points, then P*d coords (-1 = no prescription)
//   seed maxnodes maxsols shuffle
// output: one line per solution: "SOL", then per tile "shape v0 ... " lines, then "END"
#include <bits/stdc++.h>
using namespace std;

typedef vector<int> Pt;  // coords
static int N, D;
static vector<long long> modu;
static vector<complex<double>> powf_;

struct Key {
    size_t operator()(const Pt& p) const {
        size_t h = 1469598103934665603ULL;
        for (int v : p) { h ^= (size_t)(v + 1000003); h *= 1099511628211ULL; }
        return h;
    }
};

complex<double> fl(const Pt& p) {
    complex<double> z = 0;
    for (int j = 0; j < D; j++) z += (double)p[j] * powf_[j];
    return z;
}

struct Variant { int shape; vector<Pt> v; vector<complex<double>> f; vector<int> dout, ang; };
struct Tile { int var; Pt t; vector<Pt> v; vector<complex<double>> f; double x0, x1, y0, y1; };

static vector<Variant> vars;
static vector<int> counts;
static vector<Pt> target;
static vector<complex<double>> ftarget;
static bool hasSym = false;
static vector<vector<int>> symM;
static Pt symT;
static vector<Pt> prescribed;
static bool hasPrescribed = false;
static unordered_map<Pt, int, Key> presIdx;

static const double EPS = 1e-9;

int dirIndex(complex<double> e) {
    double a = atan2(e.imag(), e.real());
    double u = a / (2 * M_PI) * N;
    int k = (int)llround(u);
    if (fabs(u - k) > 1e-6) return -1;
    return ((k % N) + N) % N;
}

double cross(complex<double> a, complex<double> b) { return a.real() * b.imag() - a.imag() * b.real(); }

// ---- state ----
struct PointInfo { Pt p; complex<double> f; unsigned mask; bool pres; };
static vector<PointInfo> pts;
static unordered_map<Pt, int, Key> ptIdx;
static vector<Tile> tiles;
static unsigned FULL;

Pt add(const Pt& a, const Pt& b) { Pt r(D); for (int j = 0; j < D; j++) r[j] = a[j] + b[j]; return r; }
Pt sub(const Pt& a, const Pt& b) { Pt r(D); for (int j = 0; j < D; j++) r[j] = a[j] - b[j]; return r; }

unsigned sectorMask(int start, int len) {
    unsigned m = 0;
    for (int i = 0; i < len; i++) m |= 1u << ((start + i) % N);
    return m;
}

// where is point f relative to polygon: 2 inside, 1 on boundary (edge index via out), 0 outside
int locate(complex<double> p, const vector<complex<double>>& poly, int* edge) {
    int k = poly.size(); bool on = false;
    for (int i = 0; i < k; i++) {
        complex<double> a = poly[i], b = poly[(i + 1) % k];
        double c = cross(b - a, p - a) / abs(b - a);
        if (c < -EPS) return 0;
        if (fabs(c) <= EPS) { on = true; if (edge) *edge = i; }
    }
    return on ? 1 : 2;
}

bool isVertexOf(complex<double> p, const vector<complex<double>>& poly) {
    for (auto& q : poly) if (abs(q - p) < 1e-7) return true;
    return false;
}

bool sepAxis(const vector<complex<double>>& P, const vector<complex<double>>& Q) {
    int k = P.size();
    for (int i = 0; i < k; i++) {
        complex<double> a = P[i], e = P[(i + 1) % k] - a;
        double le = abs(e); bool all = true;
        for (auto& v : Q) if (cross(e, v - a) / le > EPS) { all = false; break; }
        if (all) return true;
    }
    return false;
}

bool disjointF(const Tile& A, const vector<complex<double>>& f, double x0, double x1, double y0, double y1) {
    if (A.x1 < x0 + 1e-9 || x1 < A.x0 + 1e-9 || A.y1 < y0 + 1e-9 || y1 < A.y0 + 1e-9) return true;
    return sepAxis(A.f, f) || sepAxis(f, A.f);
}

// mask a polygon (ccw) covers at point p, or -1 if p is interior to the polygon; 0 if not touching
long long coverAt(complex<double> p, const vector<complex<double>>& poly, const vector<int>& dirs) {
    int e = -1; int loc = locate(p, poly, &e);
    if (loc == 0) return 0;
    if (loc == 2) return -1;
    int k = poly.size();
    for (int i = 0; i < k; i++) if (abs(poly[i] - p) < 1e-7) {
        int dout = dirs[i], din = (dirs[(i - 1 + k) % k] + N / 2) % N;  // reverse of incoming
        int ang = ((din - dout) % N + N) % N;
        return sectorMask(dout, ang);
    }
    return sectorMask(dirs[e], N / 2);
}

vector<int> edgeDirs(const vector<complex<double>>& f) {
    int k = f.size(); vector<int> d(k);
    for (int i = 0; i < k; i++) d[i] = dirIndex(f[(i + 1) % k] - f[i]);
    return d;
}
static vector<int> tdirs;

// try to place; returns true and applies if it fits.  Undo info pushed.
struct Undo { int ntiles; int npts; vector<pair<int, unsigned>> masks; int var; };

bool place(const vector<Pt>& V, int var, Undo& u) {
    const Variant& vr = vars[var];
    int k = V.size();
    vector<complex<double>> f(k);
    double x0 = 1e18, x1 = -1e18, y0 = 1e18, y1 = -1e18;
    for (int i = 0; i < k; i++) {
        f[i] = fl(V[i]);
        x0 = min(x0, f[i].real()); x1 = max(x1, f[i].real());
        y0 = min(y0, f[i].imag()); y1 = max(y1, f[i].imag());
    }
    // inside target
    for (int i = 0; i < k; i++) if (locate(f[i], ftarget, nullptr) == 0) return false;
    for (auto& T : tiles) if (!disjointF(T, f, x0, x1, y0, y1)) return false;
    // new points: compute masks
    u.ntiles = tiles.size(); u.npts = pts.size(); u.masks.clear(); u.var = var;
    // existing points touched by the new tile
    vector<pair<int, unsigned>> upd;
    for (int pi = 0; pi < (int)pts.size(); pi++) {
        auto& P = pts[pi];
        if (P.f.real() < x0 - 1e-7 || P.f.real() > x1 + 1e-7 || P.f.imag() < y0 - 1e-7 || P.f.imag() > y1 + 1e-7) continue;
        long long m = coverAt(P.f, f, vr.dout);
        if (m == 0) continue;
        if (m < 0) return false;
        if (P.pres && !isVertexOf(P.f, f)) return false;
        if (P.mask & (unsigned)m) return false;
        upd.push_back({pi, (unsigned)m});
    }
    vector<PointInfo> newpts;
    for (int i = 0; i < k; i++) {
        if (ptIdx.count(V[i])) continue;
        PointInfo P; P.p = V[i]; P.f = f[i]; P.pres = false;
        unsigned mask = 0;
        // target outside
        int e = -1; int loc = locate(f[i], ftarget, &e);
        if (loc == 1) {
            if (hasPrescribed) return false;  // boundary vertices are all prescribed (and pre-created)
            long long tm = coverAt(f[i], ftarget, tdirs);
            mask |= FULL & ~(unsigned)tm;
        }
        for (auto& T : tiles) {
            if (f[i].real() < T.x0 - 1e-7 || f[i].real() > T.x1 + 1e-7 || f[i].imag() < T.y0 - 1e-7 || f[i].imag() > T.y1 + 1e-7) continue;
            long long m = coverAt(f[i], T.f, vars[T.var].dout);
            if (m < 0) return false;
            if (mask & (unsigned)m) return false;
            mask |= (unsigned)m;
        }
        long long own = coverAt(f[i], f, vr.dout);
        if (mask & (unsigned)own) return false;
        mask |= (unsigned)own;
        P.mask = mask;
        newpts.push_back(P);
    }
    for (auto& pr : upd) { u.masks.push_back({pr.first, pts[pr.first].mask}); pts[pr.first].mask |= pr.second; }
    for (auto& P : newpts) { ptIdx[P.p] = pts.size(); pts.push_back(P); }
    Tile T; T.var = var; T.v = V; T.f = f; T.x0 = x0; T.x1 = x1; T.y0 = y0; T.y1 = y1;
    tiles.push_back(T);
    counts[vr.shape]--;
    return true;
}

void undo(const Undo& u) {
    counts[vars[tiles.back().var].shape]++;
    tiles.resize(u.ntiles);
    for (int i = pts.size() - 1; i >= u.npts; i--) ptIdx.erase(pts[i].p);
    pts.resize(u.npts);
    for (int i = u.masks.size() - 1; i >= 0; i--) pts[u.masks[i].first].mask = u.masks[i].second;
}

vector<Pt> symImage(const vector<Pt>& V) {
    vector<Pt> W;
    for (auto& p : V) {
        Pt q(D);
        for (int r = 0; r < D; r++) { long long s = symT[r]; for (int c2 = 0; c2 < D; c2++) s += (long long)symM[r][c2] * p[c2]; q[r] = s; }
        W.push_back(q);
    }
    // reflection reverses orientation: keep ccw
    reverse(W.begin(), W.end());
    return W;
}

int findVariant(int shape, const vector<Pt>& W, vector<Pt>& out) {
    // match W (ccw vertex list, some rotation) against variants of the shape
    for (int vi = 0; vi < (int)vars.size(); vi++) {
        if (vars[vi].shape != shape || vars[vi].v.size() != W.size()) continue;
        int k = W.size();
        for (int s = 0; s < k; s++) {
            Pt t = sub(W[s], vars[vi].v[0]);
            bool ok = true;
            for (int i = 0; i < k && ok; i++) if (add(vars[vi].v[i], t) != W[(s + i) % k]) ok = false;
            if (ok) { out.clear(); for (int i = 0; i < k; i++) out.push_back(W[(s + i) % k]); return vi; }
        }
    }
    return -1;
}

static long long nodes = 0, maxNodes = 1000000;
static int maxSols = 1, nsols = 0;
static mt19937 rng(1);
static bool shuffleOn = false;

struct Cand { int var; vector<Pt> V; };

void gapsOf(unsigned mask, vector<pair<int, int>>& g) {
    g.clear();
    if (mask == FULL) return;
    if (mask == 0) return;  // no anchor
    for (int s = 0; s < N; s++) {
        if ((mask >> s) & 1) continue;
        if (!((mask >> ((s - 1 + N) % N)) & 1)) continue;
        int len = 0;
        while (!((mask >> ((s + len) % N)) & 1)) len++;
        g.push_back({s, len});
    }
}

void printSol() {
    printf("SOL\n");
    for (auto& T : tiles) {
        printf("%d", vars[T.var].shape);
        for (auto& p : T.v) for (int j = 0; j < D; j++) printf(" %d", p[j]);
        printf("\n");
    }
    printf("END\n");
    fflush(stdout);
}

bool remainingZero() { for (int c : counts) if (c) return false; return true; }

bool tryPlaceWithOrbit(const Cand& c, vector<Undo>& us) {
    Undo u;
    if (!place(c.V, c.var, u)) return false;
    us.push_back(u);
    if (hasSym) {
        vector<Pt> W = symImage(c.V), out;
        int vi = findVariant(vars[c.var].shape, W, out);
        if (vi < 0) { undo(us.back()); us.pop_back(); return false; }
        // same tile?
        bool same = true;
        { set<Pt> a(c.V.begin(), c.V.end()), b(out.begin(), out.end()); same = (a == b); }
        if (!same) {
            if (counts[vars[vi].shape] <= 0) { undo(us.back()); us.pop_back(); return false; }
            Undo u2;
            if (!place(out, vi, u2)) { undo(us.back()); us.pop_back(); return false; }
            us.push_back(u2);
        }
    }
    return true;
}

bool solve() {
    if (remainingZero()) {
        for (auto& P : pts) if (P.mask != FULL) return false;
        nsols++; printSol();
        return nsols >= maxSols;
    }
    if (++nodes > maxNodes) return true;  // abort
    // choose gap with fewest fitting candidates
    vector<Cand> best; bool haveBest = false;
    vector<pair<int, int>> g;
    // order points by smallest gap first
    vector<tuple<int, int, int, int>> order;  // len, pi, start
    for (int pi = 0; pi < (int)pts.size(); pi++) {
        gapsOf(pts[pi].mask, g);
        for (auto& gg : g) order.push_back({gg.second, pi, gg.first, 0});
    }
    if (order.empty()) return false;
    sort(order.begin(), order.end());
    int examined = 0;
    for (auto& o : order) {
        int len = get<0>(o), pi = get<1>(o), st = get<2>(o);
        vector<Cand> cs;
        set<vector<Pt>> seen;
        for (int vi = 0; vi < (int)vars.size(); vi++) {
            const Variant& vr = vars[vi];
            if (counts[vr.shape] <= 0) continue;
            for (int i = 0; i < (int)vr.v.size(); i++) {
                if (vr.dout[i] != st || vr.ang[i] > len) continue;
                Pt t = sub(pts[pi].p, vr.v[i]);
                vector<Pt> V; for (auto& q : vr.v) V.push_back(add(q, t));
                vector<Pt> key = V; sort(key.begin(), key.end());
                if (seen.count(key)) continue;
                seen.insert(key);
                vector<Undo> us;
                if (tryPlaceWithOrbit({vi, V}, us)) {
                    for (int j = us.size() - 1; j >= 0; j--) undo(us[j]);
                    cs.push_back({vi, V});
                }
            }
        }
        if (cs.empty()) return false;
        if (!haveBest || cs.size() < best.size()) { best = cs; haveBest = true; }
        if (best.size() <= 1) break;
        if (++examined >= 6) break;
    }
    if (shuffleOn) shuffle(best.begin(), best.end(), rng);
    else stable_sort(best.begin(), best.end(), [](const Cand& a, const Cand& b) { return vars[a.var].v.size() > vars[b.var].v.size(); });
    for (auto& c : best) {
        vector<Undo> us;
        if (!tryPlaceWithOrbit(c, us)) continue;
        bool r = solve();
        for (int j = us.size() - 1; j >= 0; j--) undo(us[j]);
        if (r) return true;
    }
    return false;
}

int main() {
    if (scanf("%d %d", &N, &D) != 2) return 1;
    modu.resize(D + 1);
    for (int i = 0; i <= D; i++) scanf("%lld", &modu[i]);
    for (int j = 0; j < D; j++) powf_.push_back(polar(1.0, 2 * M_PI * j / N));
    FULL = (N >= 32) ? 0xffffffffu : ((1u << N) - 1);
    int S; scanf("%d", &S);
    for (int s = 0; s < S; s++) {
        Variant v; int nv; scanf("%d %d", &v.shape, &nv);
        for (int i = 0; i < nv; i++) { Pt p(D); for (int j = 0; j < D; j++) scanf("%d", &p[j]); v.v.push_back(p); v.f.push_back(fl(p)); }
        v.dout = edgeDirs(v.f);
        for (int i = 0; i < nv; i++) {
            int din = (v.dout[(i - 1 + nv) % nv] + N / 2) % N;
            v.ang.push_back(((din - v.dout[i]) % N + N) % N);
        }
        vars.push_back(v);
    }
    int K; scanf("%d", &K); counts.resize(K);
    for (int i = 0; i < K; i++) scanf("%d", &counts[i]);
    int T; scanf("%d", &T);
    for (int i = 0; i < T; i++) { Pt p(D); for (int j = 0; j < D; j++) scanf("%d", &p[j]); target.push_back(p); ftarget.push_back(fl(p)); }
    tdirs = edgeDirs(ftarget);
    int sym; scanf("%d", &sym);
    if (sym) {
        hasSym = true; symM.assign(D, vector<int>(D)); symT.assign(D, 0);
        for (int r = 0; r < D; r++) for (int c2 = 0; c2 < D; c2++) scanf("%d", &symM[r][c2]);
        for (int r = 0; r < D; r++) scanf("%d", &symT[r]);
    }
    int P; scanf("%d", &P);
    if (P >= 0) {
        hasPrescribed = true;
        for (int i = 0; i < P; i++) { Pt p(D); for (int j = 0; j < D; j++) scanf("%d", &p[j]); prescribed.push_back(p); }
    }
    int Q; scanf("%d", &Q);
    vector<pair<int, vector<Pt>>> pre;
    for (int i = 0; i < Q; i++) {
        int sh2, nv; scanf("%d %d", &sh2, &nv); vector<Pt> V;
        for (int a = 0; a < nv; a++) { Pt p(D); for (int j = 0; j < D; j++) scanf("%d", &p[j]); V.push_back(p); }
        pre.push_back({sh2, V});
    }
    long long seed; int sh;
    scanf("%lld %lld %d %d", &seed, &maxNodes, &maxSols, &sh);
    rng.seed(seed); shuffleOn = sh;
    // initial points: target vertices (and prescribed boundary points)
    vector<Pt> init = target;
    for (auto& p : prescribed) if (!count(init.begin(), init.end(), p)) init.push_back(p);
    for (auto& p : init) {
        PointInfo Q; Q.p = p; Q.f = fl(p); Q.pres = hasPrescribed;
        long long tm = coverAt(Q.f, ftarget, tdirs);
        Q.mask = FULL & ~(unsigned)tm;
        ptIdx[p] = pts.size(); pts.push_back(Q);
    }
    for (auto& pr : pre) {
        vector<Pt> out; int vi = findVariant(pr.first, pr.second, out);
        Undo u;
        if (vi < 0 || !place(out, vi, u)) { fprintf(stderr, "preplaced tile rejected\n"); return 0; }
    }
    solve();
    fprintf(stderr, "nodes %lld sols %d\n", nodes, nsols);
    return 0;
}
