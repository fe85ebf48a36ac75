# Copyright 2026 The vsasrl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Symbolic Euler-Lagrange derivation of the two-link elastic-joint arm.

Builds the Lagrangian from centre-of-mass kinematics (theta1 clockwise from
+y, theta2 counter-clockwise relative to link 1, in-plane gravity along -y
scaled by sin(alpha)) and prints reference values used by the unit tests.
"""
import sympy as sp

t1, t2, d1, d2 = sp.symbols("theta1 theta2 dtheta1 dtheta2", real=True)
m1, m2, l1, lc1, lc2, I1, I2, g, al = sp.symbols("m1 m2 l1 lc1 lc2 I1 I2 g alpha", positive=True)

q = sp.Matrix([t1, t2])
dq = sp.Matrix([d1, d2])
a2 = t1 - t2
p1 = sp.Matrix([lc1 * sp.sin(t1), lc1 * sp.cos(t1)])
p2 = sp.Matrix([l1 * sp.sin(t1) + lc2 * sp.sin(a2), l1 * sp.cos(t1) + lc2 * sp.cos(a2)])
v1 = p1.jacobian(q) * dq
v2 = p2.jacobian(q) * dq
w1, w2 = d1, d1 - d2
T = sp.Rational(1, 2) * (m1 * v1.dot(v1) + m2 * v2.dot(v2) + I1 * w1**2 + I2 * w2**2)
U = g * sp.sin(al) * (m1 * p1[1] + m2 * p2[1])

M = sp.hessian(T, dq).applyfunc(sp.simplify)
G = sp.Matrix([sp.diff(U, v) for v in q]).applyfunc(sp.simplify)
C = sp.zeros(2, 2)
for i in range(2):
    for j in range(2):
        C[i, j] = sum(
            sp.Rational(1, 2)
            * (sp.diff(M[i, j], q[k]) + sp.diff(M[i, k], q[j]) - sp.diff(M[j, k], q[i]))
            * dq[k]
            for k in range(2)
        )

params = {m1: 2.0, m2: 0.8, l1: 0.674, lc1: 0.25, lc2: 0.30, I1: 0.08, I2: 0.025, g: 9.81}
J = (2.5, 2.5)


def show(name, expr, subs):
    val = sp.N(expr.subs(params).subs(subs), 17)
    print(name, [float(x) for x in val])


for th2 in (0.0, sp.pi / 2):
    show(f"M1 theta=(0.3, {th2})", M, {t1: 0.3, t2: th2})
show("M1 theta=(0.3, 0.7)", M, {t1: 0.3, t2: 0.7})
show("g alpha=0.1 theta=(0.3, 0.7)", G, {al: 0.1, t1: 0.3, t2: 0.7})
show("C theta=(0.3, 0.7) dtheta=(0.4, -1.1)", C, {t1: 0.3, t2: 0.7, d1: 0.4, d2: -1.1})
beta = G - C.T * dq
show("beta alpha=0.1 theta=(0.3, 0.7) dtheta=(0.4, -1.1)", beta,
     {al: 0.1, t1: 0.3, t2: 0.7, d1: 0.4, d2: -1.1})
pm = M * dq + sp.Matrix([J[0] * 0.25, J[1] * -0.5])
show("p theta=(0.3, 0.7) dtheta=(0.4, -1.1) dphi=(0.25, -0.5)", pm,
     {t1: 0.3, t2: 0.7, d1: 0.4, d2: -1.1})
