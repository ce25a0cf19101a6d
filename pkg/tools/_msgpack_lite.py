import struct
def unpack(b, i=0):
    t = b[i]
    if t <= 0x7f: return t, i+1
    if 0x80 <= t <= 0x8f:
        n=t&0xf; d={}; i+=1
        for _ in range(n):
            k,i=unpack(b,i); v,i=unpack(b,i); d[k]=v
        return d,i
    if 0x90 <= t <= 0x9f: return _arr(b,i+1,t&0xf)
    if 0xa0 <= t <= 0xbf:
        n=t&0x1f; return b[i+1:i+1+n].decode(), i+1+n
    if t==0xc0: return None,i+1
    if t==0xc2: return False,i+1
    if t==0xc3: return True,i+1
    if t==0xd9: n=b[i+1]; return b[i+2:i+2+n].decode(), i+2+n
    if t==0xda: n=struct.unpack('>H',b[i+1:i+3])[0]; return b[i+3:i+3+n].decode(), i+3+n
    if t==0xdc: n=struct.unpack('>H',b[i+1:i+3])[0]; return _arr(b,i+3,n)
    if t==0xdd: n=struct.unpack('>I',b[i+1:i+5])[0]; return _arr(b,i+5,n)
    if t==0xde:
        n=struct.unpack('>H',b[i+1:i+3])[0]; d={}; i+=3
        for _ in range(n):
            k,i=unpack(b,i); v,i=unpack(b,i); d[k]=v
        return d,i
    if t==0xcc: return b[i+1], i+2
    if t==0xcd: return struct.unpack('>H',b[i+1:i+3])[0], i+3
    if t>=0xe0: return t-256, i+1
    raise ValueError(hex(t))
def _arr(b,i,n):
    out=[]
    for _ in range(n):
        v,i=unpack(b,i); out.append(v)
    return out,i
